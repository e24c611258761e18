"""Subcommand handlers: each takes a RunConfig and returns a process exit code."""
import logging
from typing import Callable, Optional

from app.api import export
from app.core.config import settings
from app.core.exceptions import InvalidConfigError, NilflowError, UnsupportedParametersError, VerificationFailure
from app.schemas.flow import FlowState
from app.schemas.run import Command, OutputFormat, RunConfig
from app.schemas.structure import JParams
from app.services.flow_service import AnomalyFlowService, get_flow_service
from app.services.verification_service import VerificationService, get_verification_service

logger = logging.getLogger(__name__)


def resolve_params(config: RunConfig, flow: AnomalyFlowService) -> JParams:
    """
    Complex structure of a run: the catalog representative when a group is set.

    Raises:
        InvalidConfigError: If the group has no representative in the family
    """
    if config.group is None:
        return config.params
    try:
        return flow.gauduchon.lie.catalog_params(config.group)
    except NilflowError as e:
        raise InvalidConfigError(e.detail)


def _write_states(config: RunConfig, states: list[FlowState], metadata: dict) -> None:
    if config.format == OutputFormat.CSV:
        export.write_output(export.trajectory_csv(states), config.out)
    else:
        export.write_output(export.trajectory_json(states, metadata), config.out)


def cmd_verify(config: RunConfig, verification: Optional[VerificationService] = None) -> int:
    """
    Run the oracle suites and write the per-draw report.

    Raises:
        VerificationFailure: If any closed form disagrees with its brute-force value
    """
    verification = verification or get_verification_service()
    logger.info(f"Attempting to verify closed forms on {config.draws} draws (seed {config.seed})")
    report = verification.run(config.draws, config.seed)
    if config.format == OutputFormat.CSV:
        lines = ["index,check,max_rel_error,worst_entry,passed"]
        lines += [f"{e.index},{e.check},{format(e.max_rel_error, '.17g')},{e.worst_entry or ''},{e.passed}"
                  for e in report.entries]
        export.write_output("\n".join(lines), config.out)
    else:
        export.write_output(export.to_json({"report": report, "passed": report.passed}), config.out)
    if not report.passed:
        worst = report.worst()
        raise VerificationFailure(
            f"{len(report.failures)} checks failed; worst {worst.check} draw {worst.index} "
            f"at {worst.worst_entry}: {worst.max_rel_error:.3g}"
        )
    logger.info("All closed forms agree with the first-principles computation")
    return 0


def cmd_flow(config: RunConfig, flow: Optional[AnomalyFlowService] = None) -> int:
    """
    Integrate the flat-bundle model problem, or the coupled flow when a
    bundle metric is configured, and write the trajectory.
    """
    flow = flow or get_flow_service()
    params = resolve_params(config, flow)
    logger.info(f"Attempting to run the Anomaly flow on {params!r}")
    if config.bundle_metric is None:
        constants = flow.model_constants(params, config.metric, config.alpha_prime, config.tau)
        reduced = flow.hermitian.reduce_almost_diagonal(params, config.metric).metric
        c = flow.conserved_constants(reduced)
        h0 = reduced.r2
        trajectory = flow.integrate_model(constants.K1, constants.K2, h0, config.dt, config.t_max)
        states = flow.reconstruct_flat_flow(c, trajectory)
        classification = flow.classify_model(constants.K1, constants.K2, h0)
        summary = {"kind": classification.kind.value, "K1": constants.K1, "K2": constants.K2,
                   "blow_down": trajectory.blow_down, "blow_down_time": trajectory.blow_down_time}
        metadata = {"params": params, "conserved": c, "constants": constants, "classification": classification}
    else:
        trajectory = flow.integrate_coupled(params, config.metric, config.bundle_metric, config.kappa,
                                            config.tau, config.alpha_prime, config.dt, config.t_max)
        states = trajectory.states
        last = states[-1]
        dr2 = flow.coupled_rhs(params, last, trajectory.constants, config.kappa, config.tau, config.alpha_prime)[0]
        residuals = flow.hsi_residuals(params, last.omega, last.H, config.tau, config.kappa, config.alpha_prime)
        summary = {"final_r2": last.omega.r2, "final_dr2_dt": dr2, "blow_down": trajectory.blow_down,
                   "hsi_max_residual": residuals.max_residual,
                   "hsi_ok": residuals.all_below(settings.INSTANTON_TOL)}
        metadata = {"params": params, "conserved": trajectory.constants, "kappa": config.kappa, "tau": config.tau,
                    "alpha_prime": config.alpha_prime, "hsi": residuals}
    if trajectory.blow_down:
        logger.warning(f"Flow stopped at t = {states[-1].t}: last state {states[-1].omega!r}")
    metadata["summary"] = summary
    _write_states(config, states, metadata)
    logger.info(f"Flow finished: {summary}")
    if config.out is not None:
        print(export.to_json(summary))
    return 0


def cmd_classify(config: RunConfig, flow: Optional[AnomalyFlowService] = None) -> int:
    """
    Classify every (K1, K2, h0) grid point and confirm it numerically; then
    exhibit an immortal and an ancient solution on the configured structure.
    """
    flow = flow or get_flow_service()
    logger.info(f"Attempting to classify a {len(config.k1_grid)}x{len(config.k2_grid)} grid")
    grid = []
    for K1 in config.k1_grid:
        for K2 in config.k2_grid:
            h_star = (-K2 / K1) ** 0.5 if K1 * K2 < 0 else None
            h0_values = [h_star / 2, h_star, 2 * h_star] if h_star else [0.5, 1.0, 2.0]
            for h0 in h0_values:
                cls = flow.classify_model(K1, K2, h0)
                confirmed = flow.confirm_classification(K1, K2, h0, dt=config.dt, t_max=config.t_max)
                if not confirmed:
                    logger.warning(f"Numerical run disagrees with {cls.kind.value} at K1={K1}, K2={K2}, h0={h0}")
                grid.append({"K1": K1, "K2": K2, "h0": h0, "classification": cls, "confirmed": confirmed})
    payload = {"grid": grid}
    params = resolve_params(config, flow)
    try:
        (a_imm, _, imm), (a_anc, _, anc) = flow.immortal_and_ancient(params, config.metric, config.tau)
        payload["immortal_and_ancient"] = {"params": params, "immortal": {"alpha_prime": a_imm, "classification": imm},
                                           "ancient": {"alpha_prime": a_anc, "classification": anc}}
    except UnsupportedParametersError as e:
        logger.warning(f"No immortal/ancient pair on {params!r}: {e.detail}")
    export.write_output(export.to_json(payload), config.out)
    return 0


def cmd_table_k1(config: RunConfig, flow: Optional[AnomalyFlowService] = None) -> int:
    """Print the achievable signs of K1 per group."""
    flow = flow or get_flow_service()
    logger.info("Attempting to build the sign table of K1")
    rows = flow.k1_sign_table()
    if config.format == OutputFormat.CSV:
        lines = ["group,signs,computed"] + [f"{r.group.value},{' '.join(r.signs)},{r.computed}" for r in rows]
        export.write_output("\n".join(lines), config.out)
    else:
        export.write_output(export.to_json({"rows": rows}), config.out)
    return 0


def cmd_hsi(config: RunConfig, flow: Optional[AnomalyFlowService] = None) -> int:
    """
    Hull-Strominger-Ivanov residuals at the configured state, or at the end
    of a coupled run when ``settle`` is set. Exit 0 iff all are below INSTANTON_TOL.
    """
    flow = flow or get_flow_service()
    if config.bundle_metric is None:
        raise InvalidConfigError("hsi needs a bundle metric (--bundle)")
    params = resolve_params(config, flow)
    omega, H = config.metric, config.bundle_metric
    if config.settle:
        trajectory = flow.integrate_coupled(params, omega, H, config.kappa, config.tau, config.alpha_prime,
                                            config.dt, config.t_max)
        omega, H = trajectory.states[-1].omega, trajectory.states[-1].H
    logger.info(f"Attempting to evaluate HSI residuals at {omega!r}, {H!r}")
    residuals = flow.hsi_residuals(params, omega, H, config.tau, config.kappa, config.alpha_prime)
    ok = residuals.all_below(settings.INSTANTON_TOL)
    export.write_output(export.to_json({"omega": omega, "H": H, "residuals": residuals, "solution": ok}), config.out)
    return 0 if ok else 1


COMMANDS: dict[Command, Callable[[RunConfig], int]] = {
    Command.VERIFY: cmd_verify,
    Command.FLOW: cmd_flow,
    Command.CLASSIFY: cmd_classify,
    Command.TABLE_K1: cmd_table_k1,
    Command.HSI: cmd_hsi,
}


def run_command(config: RunConfig) -> int:
    """
    Dispatch a configured command and map domain errors to exit codes.

    Returns:
        int: 0 on success, 1 on verification or runtime failure, 2 on invalid input
    """
    try:
        return COMMANDS[config.command](config)
    except NilflowError as e:
        logger.error(f"{config.command.value} failed: {e.detail}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {config.command.value}: {str(e)}")
        return 1
