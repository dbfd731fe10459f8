"""Shared helpers for pydantic models."""

from typing import Any, TypeVar

import pydantic

from simlob.exceptions import ParameterError

ModelT = TypeVar("ModelT", bound=pydantic.BaseModel)


def build_model(model_cls: type[ModelT], data: dict[str, Any]) -> ModelT:
    """Validate data into a model, raising ParameterError instead of pydantic's error."""
    try:
        return model_cls.model_validate(data)
    except pydantic.ValidationError as e:
        raise ParameterError(f"Invalid {model_cls.__name__}: {e}") from e
