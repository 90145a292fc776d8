"""Command-line front door: one JSON run config in, one report out.

Exit status: 0 when every check holds, 1 when a mathematical check fails,
2 for configuration and usage errors.
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .anco_analysis import FamilySpec
from .config import Tolerances, get_settings, override_settings
from .errors import USAGE_ERRORS, ConfigurationError, CurvatureLabError, MetricValidationError
from .metric_catalog import ManifoldSpec, catalog_get
from .services.curvature_lab import CurvatureLab
from .utils import configure_logging

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1.0'

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

Command = Literal['spectrum', 'gauss-bonnet', 'pw-check', 'weyl-check', 'anco-certify', 'scale-check']


class ManifoldBlock(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str
    params: List[float] = Field(default_factory=list)

    def resolve(self) -> ManifoldSpec:
        return catalog_get(self.name, self.params)


class OutputBlock(BaseModel):
    model_config = ConfigDict(extra='forbid')

    path: Optional[str] = None
    format: Literal['json', 'csv'] = 'json'


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    command: Command
    manifold: Optional[ManifoldBlock] = None
    manifolds: Optional[List[ManifoldBlock]] = None
    family: Optional[FamilySpec] = None
    order: Optional[int] = Field(default=None, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    points: int = Field(default=4, ge=1)
    samples: int = Field(default=1000, ge=1)
    p: Optional[List[int]] = None
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2])
    trials: int = Field(default=10000, ge=1)
    max_size: int = Field(default=12, ge=2)
    scales: List[float] = Field(default_factory=lambda: [0.5, 2.0, 10.0])
    Lambda: Optional[float] = Field(default=None, ge=0)
    tolerances: Optional[Tolerances] = None
    output: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode='after')
    def _check_command_block(self):
        if self.command in ('spectrum', 'gauss-bonnet', 'pw-check') and self.manifold is None:
            raise ValueError(f"{self.command} needs a manifold block")
        if self.command == 'anco-certify' and self.family is None:
            raise ValueError("anco-certify needs a family block")
        if self.command == 'scale-check' and not (self.manifold or self.manifolds):
            raise ValueError("scale-check needs a manifold or manifolds block")
        return self


class Report(BaseModel):
    model_config = ConfigDict(extra='forbid')

    schema_version: str = SCHEMA_VERSION
    command: str
    config: Dict[str, Any]
    records: List[Dict[str, Any]]
    summary: Dict[str, Any]
    runtime_ms: float
    tool_version: str = __version__

    @model_validator(mode='after')
    def _check_summary(self):
        if 'verdict' not in self.summary or 'worst_slack' not in self.summary:
            raise ValueError("summary must carry verdict and worst_slack")
        return self


class ErrorReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: Optional[str] = None
    error: Dict[str, Any]
    tool_version: str = __version__


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='curvlab', description="Numerical laboratory for curvature operators")
    parser.add_argument('--config', type=Path, required=True, help="JSON run configuration")
    parser.add_argument('--output', type=Path, default=None, help="report path (stdout when omitted)")
    parser.add_argument('--format', choices=['json', 'csv'], default=None)
    parser.add_argument('--threads', type=int, default=None)
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--order', type=int, default=None, help="Gauss-Legendre nodes per axis")
    parser.add_argument('--log-level', default=None)
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    return parser


def load_config(path: Path) -> RunConfig:
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigurationError("config must be a JSON object")
    return RunConfig.model_validate(payload)


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    # flag > config > environment > default
    settings = get_settings()
    changes: Dict[str, Any] = {
        'threads': args.threads or config.threads or settings.threads,
        'order': args.order or config.order or settings.order,
    }
    if config.tolerances is not None:
        changes['tolerances'] = config.tolerances
    if args.log_level:
        changes['log_level'] = args.log_level
    override_settings(**changes)
    updates: Dict[str, Any] = {'order': changes['order'], 'threads': changes['threads']}
    if args.seed is not None:
        updates['seed'] = args.seed
    return config.model_copy(update=updates)


def run(config: RunConfig):
    """Execute the configured command; returns (records, summary)."""
    lab = CurvatureLab(get_settings(), seed=config.seed)
    command = config.command
    if command == 'spectrum':
        return lab.spectrum(config.manifold.resolve(), points=config.points)
    if command == 'gauss-bonnet':
        return lab.gauss_bonnet(config.manifold.resolve(), order=config.order, bound=config.Lambda)
    if command == 'pw-check':
        return lab.pw_check(config.manifold.resolve(), p_values=config.p, seeds=config.seeds,
                            samples=config.samples, points=config.points)
    if command == 'weyl-check':
        return lab.weyl_check(trials=config.trials, max_size=config.max_size)
    if command == 'anco-certify':
        return lab.anco_certify(config.family)
    specs = [block.resolve() for block in (config.manifolds or [config.manifold])]
    return lab.scale_check(specs, scales=config.scales, points=config.points)


def _cell(value):
    if isinstance(value, (list, tuple)):
        return ' '.join(str(v) for v in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return value


def render_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode='json'), indent=2, sort_keys=True) + '\n'


def _write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')


def write_report(report: Report, path: Optional[Path], fmt: str) -> None:
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'csv':
        if path is None:
            raise ConfigurationError("csv output needs an output path")
        frame = pd.DataFrame([{k: _cell(v) for k, v in r.items()} for r in report.records])
        frame.to_csv(path, index=False)
        summary = report.model_dump(mode='json', exclude={'records'})
        _write_text(Path(path).with_suffix('.summary.json'), json.dumps(summary, indent=2, sort_keys=True) + '\n')
        return
    text = render_json(report)
    if path is None:
        sys.stdout.write(text)
    else:
        _write_text(path, text)


def _error_exit(exc: Exception, command: Optional[str], path: Optional[Path], status: int) -> int:
    error: Dict[str, Any] = {'type': type(exc).__name__, 'message': str(exc)}
    node = getattr(exc, 'node', None)
    if node is not None:
        error['node'] = node
    if isinstance(exc, ValidationError):
        error['details'] = json.loads(exc.json())
    text = render_json(ErrorReport(command=command, error=error))
    if path is None or path.suffix == '.csv':
        sys.stdout.write(text)
    else:
        _write_text(path, text)
    logger.error(f"{type(exc).__name__}: {exc}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    command = None
    output = args.output
    try:
        config = load_config(args.config)
        command = config.command
        config = _apply_overrides(config, args)
        output = args.output or (Path(config.output.path) if config.output.path else None)
        fmt = args.format or config.output.format
        start = time.perf_counter()
        records, summary = run(config)
        report = Report(
            command=command,
            config=config.model_dump(mode='json', by_alias=True),
            records=records,
            summary=summary,
            runtime_ms=round((time.perf_counter() - start) * 1000.0, 3),
        )
        write_report(report, output, fmt)
    except ValidationError as exc:
        return _error_exit(exc, command, output, EXIT_USAGE)
    except USAGE_ERRORS + (MetricValidationError,) as exc:
        return _error_exit(exc, command, output, EXIT_USAGE)
    except CurvatureLabError as exc:
        return _error_exit(exc, command, output, EXIT_CHECK_FAILED)

    verdict = bool(report.summary['verdict'])
    logger.info(f"{command} finished in {report.runtime_ms:.0f} ms; verdict {'holds' if verdict else 'FAILED'}")
    return EXIT_OK if verdict else EXIT_CHECK_FAILED


if __name__ == '__main__':
    sys.exit(main())
