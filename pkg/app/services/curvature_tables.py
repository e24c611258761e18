"""Closed forms of the Gauduchon connections and curvatures.

Entries are keyed by 1-based (i, j) of the matrix and then by k of e^k
(connections) or (k, l) of e^{kl} (curvatures). Only the nine independent
entries (i < j) are listed; the others follow from the J-relations and
antisymmetry.

Three entries are corrected against the first-principles computation: the
e¹⁵ term of Ω³₅, the e³⁵ term of Ω³₆, and the e³⁵, e³⁶, e⁴⁵, e⁴⁶ terms
of (A^κ)³₆.
"""
import math


def tangent_connection_table(t: float, rho: float, lam: float, x: float, y: float,
                             re2: float, u1: float, u2: float, ke2: float, D: float) -> dict[tuple[int, int], dict[int, float]]:
    """Connection 1-forms σ^τ in the adapted basis, as {(i, j): {k: coefficient of e^k}}."""
    ke = math.sqrt(ke2)
    D2 = D * D
    uu = u1 * u1 + u2 * u2
    a = uu - lam * re2 * u2 + re2 * re2 * x
    b = lam * u1 - re2 * y
    return {
        (1, 2): {6: -ke / re2 * (t - 1)},
        (1, 3): {5: lam * ke / (2 * D) * (t - 1), 6: ke * u1 / (re2 * D) * (t - 1)},
        (1, 4): {6: -ke * (lam * re2 - 2 * u2) / (2 * re2 * D) * (t - 1)},
        (1, 5): {
            1: -ke / (2 * re2) * (t + 1),
            3: ke / (2 * re2 * D) * (rho * re2 * (t - 1) + (u2 - lam * re2) * (t + 1)),
            4: -ke * u1 / (2 * re2 * D) * (t + 1),
        },
        (1, 6): {
            2: ke / (2 * re2) * (t + 1),
            3: -ke * u1 / (2 * re2 * D) * (t + 1),
            4: ke / (2 * re2 * D) * (rho * re2 * (t - 1) - (u2 - lam * re2) * (t + 1)),
        },
        (3, 4): {5: -ke * b / D2 * (t - 1), 6: -ke * a / (re2 * D2) * (t - 1)},
        (3, 5): {
            1: -ke * (rho * re2 * (t - 1) - u2 * (t + 1)) / (2 * re2 * D),
            2: ke * u1 * (t + 1) / (2 * re2 * D),
            3: -ke * a / (2 * re2 * D2) * (t + 1),
            4: ke * b / (2 * D2) * (t + 1),
        },
        (3, 6): {
            1: ke * u1 * (t + 1) / (2 * re2 * D),
            2: -ke * (rho * re2 * (t - 1) + u2 * (t + 1)) / (2 * re2 * D),
            3: ke * b / (2 * D2) * (t + 1),
            4: ke * a / (2 * re2 * D2) * (t + 1),
        },
        (5, 6): {},
    }


def tangent_curvature_table(t: float, rho: float, lam: float, x: float, y: float,
                            re2: float, se2: float, u1: float, u2: float, D: float) -> dict[tuple[int, int], dict[tuple[int, int], float]]:
    """
    Curvature 2-forms Ω^τ before the common factor k_e²/(2 r_e⁴ Δ_e²).

    The (5, 6) entry holds only the terms added to −(Ω¹₂ + Ω³₄).
    """
    q, pp = t - 1, t + 1
    q2, pp2 = q * q, pp * pp
    P = t * t - 2 * t + 5
    D2 = D * D
    uu = u1 * u1 + u2 * u2
    re4, re6, re8 = re2 ** 2, re2 ** 3, re2 ** 4
    return {
        (1, 2): {
            (1, 2): -P*D2,
            (1, 3): P*u1*D,
            (2, 4): P*u1*D,
            (1, 4): (P*u2 - (rho*q*(t + 3) + lam*(t*t + 3))*re2)*D,
            (2, 3): -(P*u2 + (rho*q*(t + 3) - lam*(t*t + 3))*re2)*D,
            (3, 4): -(P*uu - 2*lam*(t*t + 3)*u2*re2 - (rho*q2 - lam*lam*pp2 + 4*x*q)*re4),
            (5, 6): -lam*q2*(lam*re2 - 2*u2)*re2,
        },
        (1, 3): {
            (1, 2): P*u1*D,
            (1, 3): -(P*u1*u1 + 0.5*(rho*q2 - 2*lam*lam*q - rho*lam*q*(t + 3) + x*pp2)*re4),
            (1, 4): -(P*u1*u2 - (rho*q*(t + 3) + lam*(t*t + 3))*u1*re2 + y/2*pp2*re4),
            (2, 3): P*u1*u2 + (rho*q*(t + 3) - lam*(t*t + 3))*u1*re2 + y/2*pp2*re4,
            (2, 4): -(P*u1*u1 + 0.5*(rho*q2 - 2*lam*lam*q + rho*lam*q*(t + 3) + x*pp2)*re4),
            (3, 4): (P*uu*u1 - 2*lam*(t*t + 3)*u1*u2*re2 + (lam*lam*(t*t + 3)*u1 + x*P*u1 + y*pp2*u2)*re4 - lam*y*(t*t + 3)*re6)/D,
            (5, 6): q2*(lam*re2 - 2*u2)*(lam*u1 - y*re2)*re2/D,
        },
        (1, 4): {
            (1, 2): (P*u2 + 2*lam*q*re2)*D,
            (1, 3): -(P*u1*u2 + 2*lam*q*u1*re2 - y/2*pp2*re4),
            (2, 4): -(P*u1*u2 + 2*lam*q*u1*re2 - y/2*pp2*re4),
            (1, 4): -(P*u2*u2 - (rho*q*(t + 3) + lam*P)*u2*re2 + 0.5*(rho*q2 - 2*lam*lam*q + rho*lam*q*(t + 3) + x*pp2)*re4),
            (2, 3): P*u2*u2 + (rho*q*(t + 3) - lam*P)*u2*re2 + 0.5*(rho*q2 - 2*lam*lam*q - rho*lam*q*(t + 3) + x*pp2)*re4,
            (3, 4): (P*uu*u2 + 2*lam*(q*u1*u1 - (t*t - t + 4)*u2*u2)*re2 + (lam*lam*(t*t + 3)*u2 + x*P*u2 - y*pp2*u1)*re4 - lam*x*(t*t + 3)*re6)/D,
            (5, 6): -q2*(2*lam*u2*u2 - (lam*se2 + lam*lam*u2 - 2*y*u1)*re2 + lam*x*re4)*re2/D,
        },
        (1, 5): {
            (1, 5): -lam/2*q*(pp*u2 - rho*q*re2)*re2,
            (1, 6): q*(rho*q - lam/2*pp)*u1*re2,
            (2, 5): -lam/2*q*pp*u1*re2,
            (2, 6): -0.5*q*(2*pp*se2 + 2*rho*q*u2 - lam*pp*u2 - rho*lam*q*re2)*re2,
            (3, 5): lam/(2*D)*q*pp*(uu - lam*u2*re2 + x*re4)*re2,
            (3, 6): q*pp*(2*u1*se2 - (lam*lam*u1 - 2*x*u1 + 2*y*u2)*re2 + lam*y*re4)*re2/(2*D),
            (4, 5): -lam/(2*D)*q*pp*(lam*u1 - y*re2)*re4,
            (4, 6): q*(2*rho*q*uu + pp*(2*se2*u2 - lam*uu) - (2*rho*q*se2 + pp*(2*lam*se2 - lam*lam*u2 - 2*x*u2 - 2*y*u1))*re2 - lam*x*pp*re4)*re2/(2*D),
        },
        (1, 6): {
            (1, 5): -lam/2*q*pp*u1*re2,
            (1, 6): -0.5*q*(2*pp*se2 - 2*rho*q*u2 - lam*pp*u2 + rho*lam*q*re2)*re2,
            (2, 5): lam/2*q*(pp*u2 + rho*q*re2)*re2,
            (2, 6): q*(rho*q + lam/2*pp)*u1*re2,
            (3, 5): -lam/(2*D)*q*pp*(lam*u1 - y*re2)*re4,
            (3, 6): -q*(2*rho*q*uu - pp*(2*se2*u2 - lam*uu) - (2*rho*q*se2 - pp*(2*lam*se2 - lam*lam*u2 - 2*x*u2 - 2*y*u1))*re2 + lam*x*pp*re4)*re2/(2*D),
            (4, 5): -lam/(2*D)*q*pp*(uu - lam*u2*re2 + x*re4)*re2,
            (4, 6): -q*pp*(2*u1*se2 - (lam*lam*u1 - 2*x*u1 + 2*y*u2)*re2 + lam*y*re4)*re2/(2*D),
        },
        (3, 4): {
            (1, 2): -(P*uu + 4*lam*q*u2*re2 - q*(rho*q + 4*x)*re4),
            (1, 3): (P*uu*u1 + 4*lam*q*u1*u2*re2 - (2*lam*lam*q*u1 + rho*lam*q*(t + 3)*u1 - x*P*u1 + y*pp2*u2)*re4 + y*q*(rho*(t + 3) + 2*lam)*re6)/D,
            (1, 4): (P*uu*u2 - (rho*q*(t + 3)*uu + lam*(t*t + 3)*u1*u1 + lam*(t*t - 4*t + 7)*u2*u2)*re2 - (2*lam*lam*q*u2 - rho*lam*q*(t + 3)*u2 - x*P*u2 - y*pp2*u1)*re4 - x*q*(rho*(t + 3) - 2*lam)*re6)/D,
            (2, 3): -(P*uu*u2 + (rho*q*(t + 3)*uu - lam*(t*t + 3)*u1*u1 - lam*(t*t - 4*t + 7)*u2*u2)*re2 - (2*lam*lam*q*u2 + rho*lam*q*(t + 3)*u2 - x*P*u2 - y*pp2*u1)*re4 + x*q*(rho*(t + 3) + 2*lam)*re6)/D,
            (2, 4): (P*uu*u1 + 4*lam*q*u1*u2*re2 - (2*lam*lam*q*u1 - rho*lam*q*(t + 3)*u1 - x*P*u1 + y*pp2*u2)*re4 - y*q*(rho*(t + 3) - 2*lam)*re6)/D,
            (3, 4): -P/D2*(uu*uu - 2*lam*uu*u2*re2 + (2*x + lam*lam)*uu*re4 - 2*lam*(x*u2 + y*u1)*re6 + (x*x + y*y)*re8),
            (5, 6): lam*q2*(lam*re2 - 2*u2)*re2,
        },
        (3, 5): {
            (1, 5): -q*pp*(lam*(u1*u1 - u2*u2) + (lam*se2 - 2*y*u1)*re2)*re2/(2*D),
            (1, 6): q*pp*(lam*u2 - se2 - x*re2)*u1*re2/D,
            (2, 5): q*(lam*u1 - y*re2)*(pp*u2 + rho*q*re2)*re2/D,
            (2, 6): q*(2*rho*q*uu + lam*pp*(u1*u1 - u2*u2) + 2*pp*se2*u2 - (2*rho*lam*q*u2 + lam*pp*se2 - 2*x*pp*u2)*re2 + 2*rho*x*q*re4)*re2/(2*D),
            (3, 5): -q*(lam*pp*uu*u2 + (rho*lam*q*uu + lam*lam*pp*(u1*u1 - u2*u2) - lam*pp*se2*u2)*re2 - (rho*lam*se2*q - lam*pp*(lam*se2 - 4*y*u1))*re4 + 2*y*y*pp*re6)*re2/(2*D2),
            (3, 6): -q*((2*rho*q + lam*pp)*uu*u1 - (2*rho*q*se2*u1 - pp*(lam*se2*u1 - 2*lam*lam*u1*u2 - 2*y*uu))*re2 + 2*lam*pp*(x*u1 + y*u2)*re4 - 2*x*y*pp*re6)*re2/(2*D2),
            (4, 5): -q*pp*(lam*uu*u1 + (lam*se2*u1 - 2*lam*lam*u1*u2 - 2*y*uu)*re2 + 2*lam*(x*u1 + y*u2)*re4 - 2*x*y*re6)*re2/(2*D2),
            (4, 6): -q*((2*rho*q*u2 - pp*(lam*u2 - 2*se2))*uu + (rho*lam*q*se2 + lam*pp*(lam*se2 - 4*x*u2))*re4 + 2*x*x*pp*re6 - (rho*q*(lam*uu + 2*se2*u2) + pp*(3*lam*se2*u2 + lam*lam*(u1*u1 - u2*u2) - 4*x*uu))*re2)*re2/(2*D2),
        },
        (3, 6): {
            (1, 5): q*(lam*u1 - y*re2)*(pp*u2 - rho*q*re2)*re2/D,
            (1, 6): -q*(2*rho*q*uu - pp*(lam*(u1*u1 - u2*u2) + 2*se2*u2) - (2*rho*lam*q*u2 - lam*pp*se2 + 2*x*pp*u2)*re2 + 2*rho*x*q*re4)*re2/(2*D),
            (2, 5): q*pp*(lam*(u1*u1 - u2*u2) + (lam*se2 - 2*y*u1)*re2)*re2/(2*D),
            (2, 6): -q*pp*(lam*u2 - se2 - x*re2)*u1*re2/D,
            (3, 6): -q*((2*pp*se2 - (2*rho*q + lam*pp)*u2)*uu - (rho*lam*q*se2 - lam*pp*(lam*se2 - 4*x*u2))*re4 + 2*x*x*pp*re6 + (rho*q*(2*se2*u2 + lam*uu) - pp*(3*lam*se2*u2 + lam*lam*(u1*u1 - u2*u2) - 4*x*uu))*re2)*re2/(2*D2),
            (4, 5): q*(lam*pp*u2*uu - (rho*lam*q*uu - lam*pp*(lam*(u1*u1 - u2*u2) - se2*u2))*re2 + (rho*lam*q*se2 + lam*pp*(lam*se2 - 4*y*u1))*re4 + 2*y*y*pp*re6)*re2/(2*D2),
            (4, 6): -q*((2*rho*q - lam*pp)*u1*uu - 2*lam*pp*(x*u1 + y*u2)*re4 + 2*x*y*pp*re6 - (2*rho*q*se2*u1 + lam*pp*se2*u1 - 2*pp*(lam*lam*u1*u2 + y*uu))*re2)*re2/(2*D2),
            (3, 5): -q*pp*(lam*uu*u1 + (lam*se2*u1 - 2*lam*lam*u1*u2 - 2*y*uu)*re2 + 2*lam*(x*u1 + y*u2)*re4 - 2*x*y*re6)*re2/(2*D2),
        },
        (5, 6): {
            (1, 2): -4*q*(lam*u2 - se2 - x*re2)*re2,
            (1, 3): 2*q*(2*u1*(lam*u2 - se2) - (rho*lam + lam*lam + 2*x)*u1*re2 + (rho + lam)*y*re4)*re2/D,
            (1, 4): 2*q*(2*u2 + (rho - lam)*re2)*(lam*u2 - se2 - x*re2)*re2/D,
            (2, 3): -2*q*(2*u2 - (rho + lam)*re2)*(lam*u2 - se2 - x*re2)*re2/D,
            (2, 4): 2*q*(2*u1*(lam*u2 - se2) + (rho*lam - lam*lam - 2*x)*u1*re2 - (rho - lam)*y*re4)*re2/D,
            (3, 4): -4*q*((lam*u2 - se2)*uu + (lam*u2*se2 - lam*lam*uu - x*uu)*re2 + (2*lam*(x*u2 + y*u1) - x*se2)*re4 - (x*x + y*y)*re6)*re2/D2,
        },
    }


def bundle_connection_table(t: float, rho: float, x: float, y: float,
                            r: float, s: float, k: float, tr2: float, ts2: float, tk2: float) -> dict[tuple[int, int], dict[int, float]]:
    """Connection 1-forms σ^κ of the bundle metric H, as {(i, j): {k: coefficient of e^k}}."""
    a = tk2 / (k * tr2)
    b = tk2 / (k * ts2)
    return {
        (1, 2): {6: -a * (t - 1)},
        (1, 3): {},
        (1, 4): {},
        (1, 5): {1: -a / 2 * (t + 1), 3: r / s * a / 2 * rho * (t - 1)},
        (1, 6): {2: a / 2 * (t + 1), 4: r / s * a / 2 * rho * (t - 1)},
        (3, 4): {5: b * y * (t - 1), 6: -b * x * (t - 1)},
        (3, 5): {1: -s / r * b / 2 * rho * (t - 1), 3: -b / 2 * x * (t + 1), 4: -b / 2 * y * (t + 1)},
        (3, 6): {2: -s / r * b / 2 * rho * (t - 1), 3: -b / 2 * y * (t + 1), 4: b / 2 * x * (t + 1)},
        (5, 6): {},
    }


def bundle_curvature_table(t: float, rho: float, x: float, y: float,
                           r2: float, s2: float, k2: float, tr2: float, ts2: float, tk2: float) -> dict[tuple[int, int], dict[tuple[int, int], float]]:
    """Curvature 2-forms A^κ of the bundle metric H."""
    r, s = math.sqrt(r2), math.sqrt(s2)
    q, pp = t - 1, t + 1
    q2, pp2 = q * q, pp * pp
    tr4, ts4, tk4 = tr2 * tr2, ts2 * ts2, tk2 * tk2
    return {
        (1, 2): {
            (1, 2): (4*q*k2*tr2*tk2 - pp2*r2*tk4)/(2*r2*k2*tr4),
            (1, 4): -rho*q*(pp*r2*tk2 + 2*k2*tr2)*tk2/(2*r*s*k2*tr4),
            (2, 3): -rho*q*(pp*r2*tk2 + 2*k2*tr2)*tk2/(2*r*s*k2*tr4),
            (3, 4): q*(rho*q*r2*tk2 + 4*x*k2*tr2)*tk2/(2*s2*k2*tr4),
        },
        (1, 3): {
            (1, 3): -(rho*q2 + x*pp2)*tk4/(4*k2*tr2*ts2),
            (2, 4): -(rho*q2 + x*pp2)*tk4/(4*k2*tr2*ts2),
            (1, 4): -y*pp2*tk4/(4*k2*tr2*ts2),
            (2, 3): y*pp2*tk4/(4*k2*tr2*ts2),
        },
        (1, 4): {
            (1, 3): y*pp2*tk4/(4*k2*tr2*ts2),
            (2, 4): y*pp2*tk4/(4*k2*tr2*ts2),
            (1, 4): -(rho*q2 + x*pp2)*tk4/(4*k2*tr2*ts2),
            (2, 3): (rho*q2 + x*pp2)*tk4/(4*k2*tr2*ts2),
        },
        (1, 5): {
            (2, 6): -q*pp*tk4/(2*k2*tr4),
            (4, 6): -rho*q2*r*tk4/(2*s*k2*tr4),
        },
        (1, 6): {
            (1, 6): -q*pp*tk4/(2*k2*tr4),
            (3, 6): rho*q2*r*tk4/(2*s*k2*tr4),
        },
        (3, 4): {
            (1, 2): q*(rho*q*s2*tk2 + 4*x*k2*ts2)*tk2/(2*r2*k2*ts4),
            (1, 3): rho*y*q*(pp*s2*tk2 + 2*k2*ts2)*tk2/(2*r*s*k2*ts4),
            (2, 4): -rho*y*q*(pp*s2*tk2 + 2*k2*ts2)*tk2/(2*r*s*k2*ts4),
            (1, 4): -rho*x*q*(pp*s2*tk2 + 2*k2*ts2)*tk2/(2*r*s*k2*ts4),
            (2, 3): -rho*x*q*(pp*s2*tk2 + 2*k2*ts2)*tk2/(2*r*s*k2*ts4),
            (3, 4): (x*x + y*y)*(4*q*k2*ts2 - pp2*s2*tk2)*tk2/(2*s2*k2*ts4),
        },
        (3, 5): {
            (2, 5): -rho*q2*s*tk4*y/(2*r*k2*ts4),
            (2, 6): rho*q2*s*tk4*x/(2*r*k2*ts4),
            (3, 5): -q*pp*tk4*y*y/(2*k2*ts4),
            (3, 6): q*pp*tk4*x*y/(2*k2*ts4),
            (4, 5): q*pp*tk4*x*y/(2*k2*ts4),
            (4, 6): -q*pp*tk4*x*x/(2*k2*ts4),
        },
        (3, 6): {
            (1, 5): rho*q2*s*tk4*y/(2*r*k2*ts4),
            (1, 6): -rho*q2*s*tk4*x/(2*r*k2*ts4),
            (3, 5): q*pp*tk4*x*y/(2*k2*ts4),
            (4, 6): -q*pp*tk4*x*y/(2*k2*ts4),
            (3, 6): -q*pp*tk4*x*x/(2*k2*ts4),
            (4, 5): q*pp*tk4*y*y/(2*k2*ts4),
        },
        (5, 6): {
            (1, 2): -(rho*q2*s2*tr4 - pp2*r2*ts4)*tk4/(2*r2*k2*tr4*ts4),
            (1, 3): -rho*y*q*pp*s*tk4/(2*r*k2*ts4),
            (2, 4): rho*y*q*pp*s*tk4/(2*r*k2*ts4),
            (1, 4): rho*q*pp*(r2*ts4 + x*s2*tr4)*tk4/(2*r*s*k2*tr4*ts4),
            (2, 3): rho*q*pp*(r2*ts4 + x*s2*tr4)*tk4/(2*r*s*k2*tr4*ts4),
            (3, 4): -(rho*q2*r2*ts4 - (x*x + y*y)*pp2*s2*tr4)*tk4/(2*s2*k2*tr4*ts4),
        },
    }
