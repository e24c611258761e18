from typing import Annotated, Any, Sequence, Union

from pydantic import GetCoreSchemaHandler, GetJsonSchemaHandler
from pydantic.json_schema import JsonSchemaValue
from pydantic_core import core_schema


def parse_complex(value: Union[complex, float, int, Sequence[float], dict]) -> complex:
    """
    Parse a complex number from its JSON-friendly forms.

    Args:
        value: complex, real number, ``[re, im]`` pair or ``{"re": .., "im": ..}``

    Returns:
        complex: Parsed value

    Raises:
        ValueError: If the value has no complex reading
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(value, (complex, float, int)):
        return complex(value)
    if isinstance(value, dict):
        return complex(float(value["re"]), float(value["im"]))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot read {value!r} as a complex number [re, im]")


def complex_pair(value: complex) -> list[float]:
    """Serialize a complex number as ``[re, im]``."""
    return [value.real, value.imag]


class _ComplexAnnotation:
    @classmethod
    def __get_pydantic_core_schema__(cls, source_type: Any, handler: GetCoreSchemaHandler) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            parse_complex,
            serialization=core_schema.plain_serializer_function_ser_schema(complex_pair),
        )

    @classmethod
    def __get_pydantic_json_schema__(cls, _schema: core_schema.CoreSchema, handler: GetJsonSchemaHandler) -> JsonSchemaValue:
        return {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


Complex = Annotated[complex, _ComplexAnnotation]
