import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == '':
        return default
    try:
        return int(value)
    except ValueError:
        return default


def _env_flag(name: str) -> bool:
    return os.getenv(name, '').strip().lower() in ('1', 'true', 'yes', 'on')


class Tolerances(BaseModel):
    """Numeric tolerances used by the checks; any field may be overridden per run."""
    model_config = ConfigDict(extra='forbid')

    symmetry: float = 1e-8
    symmetry_finite_difference: float = 1e-6
    operator_symmetry: float = 1e-10
    spd: float = 0.0
    weyl: float = 1e-10
    norm_sandwich: float = 1e-12
    pw_slack: float = 1e-8
    self_adjoint: float = 1e-9
    ricci_agreement: float = 1e-9
    certification_slack: float = 1e-10
    integrand_sign: float = 1e-10
    volume_bound: float = 1e-6
    chi: float = 1e-2
    scale_invariance: float = 1e-10
    frame_independence: float = 1e-8


class Settings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    threads: int = Field(default_factory=lambda: max(1, _env_int('CURVLAB_THREADS', os.cpu_count() or 1)))
    order: int = Field(default_factory=lambda: _env_int('CURVLAB_ORDER', 32))
    enable_dim6: bool = Field(default_factory=lambda: _env_flag('CURVLAB_ENABLE_DIM6'))
    log_level: str = Field(default_factory=lambda: os.getenv('CURVLAB_LOG_LEVEL', 'INFO'))
    tolerances: Tolerances = Field(default_factory=Tolerances)


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def override_settings(**changes) -> Settings:
    global _settings
    _settings = get_settings().model_copy(update=changes)
    return _settings
