"""
Input validation for CLI commands
"""
import configparser
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from wrightlevy.app.core.exceptions import ConfigError
from wrightlevy.app.core.logging import get_logger

logger = get_logger("wrightlevy.app.cli.validators")

T = TypeVar("T", bound=BaseModel)


def validate_model_input(model_class: Type[T], data: Dict[str, Any]) -> T:
    """
    Validate input data against a pydantic model

    Args:
        model_class: Model to validate against
        data: Raw input

    Returns:
        Validated model instance

    Raises:
        ConfigError: with one "field: message" entry per validation error
    """
    try:
        return model_class(**data)
    except ValidationError as e:
        error_details = []
        for error in e.errors():
            field = ".".join(str(loc) for loc in error["loc"]) or model_class.__name__
            error_details.append(f"{field}: {error['msg']}")
        logger.warning(f"Validation error: {'; '.join(error_details)}")
        raise ConfigError("Validation error", errors=error_details) from None


def load_config_section(path: Optional[str], verb: str, target: str) -> Dict[str, str]:
    """
    Flat key/values for a command from an INI file

    Sections are looked up as "<verb> <target>" first, then "<target>";
    [DEFAULT] entries apply to every section.

    Raises:
        ConfigError: unreadable file
    """
    if not path:
        return {}
    parser = configparser.ConfigParser()
    try:
        with Path(path).open(encoding="utf-8") as handle:
            parser.read_file(handle)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for section in (f"{verb} {target}", target):
        if parser.has_section(section):
            return dict(parser.items(section))
    return dict(parser.defaults())
