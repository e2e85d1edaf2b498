"""Line-delimited JSON files: datasets, forecasts, run manifests, and the transcript store."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError, DatasetError, LeakageError, ValidationError
from .model import (
    Forecast,
    MarketInstance,
    Method,
    Outcome,
    Probability,
    format_timestamp,
    parse_timestamp,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_REQUIRED = ("instance_id", "company", "event_id", "keyword", "cutoff_time", "resolution_time", "market_prob")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def _iter_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise DatasetError(f"invalid JSON ({exc.msg})", line=lineno) from None
            if not isinstance(obj, dict):
                raise DatasetError("expected a JSON object", line=lineno)
            yield lineno, obj


def _check_schema(obj, lineno):
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise DatasetError(f"unsupported schema_version {version!r}", line=lineno, field="schema_version")


# -- dataset ---------------------------------------------------------------

def parse_market_prob(value, lineno=None):
    """Integers are percent (Kalshi cents); reals are taken as already in [0, 1]."""
    if isinstance(value, bool):
        raise DatasetError(f"expected a number, got {value!r}", line=lineno, field="market_prob")
    if isinstance(value, int):
        if not 0 <= value <= 100:
            raise DatasetError(f"integer percent must lie in 0..100, got {value}", line=lineno, field="market_prob")
        return Probability(value / 100), "percent"
    if isinstance(value, float):
        try:
            return Probability(value), "unit"
        except ValidationError as exc:
            raise DatasetError(str(exc), line=lineno, field="market_prob") from None
    raise DatasetError(f"expected a number, got {value!r}", line=lineno, field="market_prob")


def instance_from_dict(obj: dict, lineno=None) -> MarketInstance:
    _check_schema(obj, lineno)
    for name in _REQUIRED:
        if name not in obj or obj[name] is None:
            raise DatasetError("missing required field", line=lineno, field=name)
    for name in ("instance_id", "company", "event_id", "keyword"):
        if not isinstance(obj[name], str):
            raise DatasetError(f"expected a string, got {obj[name]!r}", line=lineno, field=name)
    if not obj["keyword"].strip():
        raise DatasetError("keyword is empty", line=lineno, field="keyword")
    times = {}
    for name in ("cutoff_time", "resolution_time"):
        try:
            times[name] = parse_timestamp(obj[name])
        except ValidationError as exc:
            raise DatasetError(str(exc), line=lineno, field=name) from None
    prob, fmt = parse_market_prob(obj["market_prob"], lineno)
    outcome = obj.get("outcome")
    if outcome is not None:
        try:
            outcome = Outcome.parse(outcome)
        except ValidationError as exc:
            raise DatasetError(str(exc), line=lineno, field="outcome") from None
    try:
        return MarketInstance(
            instance_id=obj["instance_id"],
            company=obj["company"],
            event_id=obj["event_id"],
            keyword=obj["keyword"],
            cutoff_time=times["cutoff_time"],
            resolution_time=times["resolution_time"],
            market_prob=prob,
            outcome=outcome,
            prior_event_id=obj.get("prior_event_id"),
            market_prob_format=fmt,
        )
    except ValidationError as exc:
        raise DatasetError(str(exc), line=lineno, field="cutoff_time") from None


def instance_to_dict(inst: MarketInstance) -> dict:
    if inst.market_prob_format == "percent":
        market_prob = round(float(inst.market_prob) * 100)
    else:
        market_prob = float(inst.market_prob)
    row = {
        "schema_version": SCHEMA_VERSION,
        "instance_id": inst.instance_id,
        "company": inst.company,
        "event_id": inst.event_id,
        "keyword": inst.keyword,
        "cutoff_time": format_timestamp(inst.cutoff_time),
        "resolution_time": format_timestamp(inst.resolution_time),
        "market_prob": market_prob,
        "outcome": inst.outcome.to_json() if inst.outcome is not None else None,
    }
    if inst.prior_event_id is not None:
        row["prior_event_id"] = inst.prior_event_id
    return row


def load_dataset(path) -> list:
    """Read and validate a dataset JSONL file; duplicate instance ids are rejected."""
    instances = []
    seen = {}
    for lineno, obj in _iter_jsonl(path):
        inst = instance_from_dict(obj, lineno)
        if inst.instance_id in seen:
            raise DatasetError(
                f"duplicate instance_id {inst.instance_id!r} (first seen on line {seen[inst.instance_id]})",
                line=lineno, field="instance_id",
            )
        seen[inst.instance_id] = lineno
        instances.append(inst)
    if not instances:
        logger.warning("dataset %s is empty", path)
    return instances


def dump_dataset(instances, path) -> None:
    atomic_write_text(path, "".join(dumps_line(instance_to_dict(i)) + "\n" for i in instances))


# -- forecasts -------------------------------------------------------------

@dataclass
class ForecastFile:
    run_id: str
    complete: bool
    forecasts: list
    failures: list = field(default_factory=list)
    header: dict = field(default_factory=dict)


def forecast_to_dict(fc: Forecast, run_id: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "record": "forecast",
        "run_id": run_id,
        "instance_id": fc.instance_id,
        "method": fc.method.value,
        "probability": float(fc.probability),
        "raw_score": fc.raw_score,
    }


def write_forecasts(path, run_id: str, forecasts, *, complete=True, failures=(), extra_header=None) -> None:
    header = {
        "schema_version": SCHEMA_VERSION,
        "record": "header",
        "run_id": run_id,
        "complete": bool(complete),
        "n_forecasts": len(forecasts),
    }
    if extra_header:
        header.update(extra_header)
    if failures:
        header["failures"] = list(failures)
    lines = [dumps_line(header)]
    lines += [dumps_line(forecast_to_dict(fc, run_id)) for fc in forecasts]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_forecasts(path) -> ForecastFile:
    header = None
    forecasts = []
    for lineno, obj in _iter_jsonl(path):
        _check_schema(obj, lineno)
        kind = obj.get("record")
        if kind == "header":
            if header is not None:
                raise DatasetError("second header record", line=lineno, field="record")
            header = obj
            continue
        if kind != "forecast":
            raise DatasetError(f"unknown record type {kind!r}", line=lineno, field="record")
        if header is None:
            raise DatasetError("forecast record before header", line=lineno)
        if obj.get("run_id") != header["run_id"]:
            raise DatasetError("run_id differs from header", line=lineno, field="run_id")
        try:
            forecasts.append(Forecast(
                instance_id=obj["instance_id"],
                method=obj["method"],
                probability=obj["probability"],
                raw_score=obj.get("raw_score"),
            ))
        except KeyError as exc:
            raise DatasetError("missing required field", line=lineno, field=exc.args[0]) from None
        except ValueError as exc:
            raise DatasetError(str(exc), line=lineno) from None
    if header is None:
        raise DatasetError(f"{path}: no header record")
    return ForecastFile(
        run_id=header["run_id"],
        complete=bool(header.get("complete", False)),
        forecasts=forecasts,
        failures=list(header.get("failures", [])),
        header=header,
    )


def merge_forecast_files(files) -> list:
    """Union of forecasts keyed by (instance_id, method); identical duplicates collapse."""
    merged = {}
    for ff in files:
        for fc in ff.forecasts:
            key = (fc.instance_id, fc.method)
            if key in merged and merged[key] != fc:
                raise ValidationError(
                    f"conflicting forecasts for {fc.instance_id} [{fc.method.value}] across files"
                )
            merged[key] = fc
    return list(merged.values())


# -- manifests -------------------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    run_id: str
    dataset_path: str
    methods: tuple
    alpha: float
    backend: dict
    match_mode: dict
    created_at: datetime
    template_version: str
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        row = {
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "dataset_path": self.dataset_path,
            "methods": [Method(m).value for m in self.methods],
            "alpha": self.alpha,
            "backend": self.backend,
            "match_mode": self.match_mode,
            "created_at": format_timestamp(self.created_at),
            "template_version": self.template_version,
        }
        row.update(self.extra)
        return row


def append_manifest(path, manifest: RunManifest) -> None:
    """Manifests are append-only: one JSON line per run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_line(manifest.to_dict()) + "\n")


def read_manifests(path) -> list:
    return [obj for _, obj in _iter_jsonl(path)]


# -- transcripts -----------------------------------------------------------

class TranscriptStore:
    """Directory of ``<event_id>.txt`` transcripts.

    Call times come from an optional ``events.jsonl`` index
    (``event_id``, ``company``, ``call_time``) and from the dataset itself,
    where an event's ``resolution_time`` is its call time.
    """

    INDEX_NAME = "events.jsonl"

    def __init__(self, directory, instances=()):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise ValidationError(f"transcripts directory {self.directory} does not exist")
        self.events = {}
        for inst in instances:
            self.events.setdefault(inst.event_id, (inst.company, inst.resolution_time))
        index = self.directory / self.INDEX_NAME
        if index.exists():
            for lineno, obj in _iter_jsonl(index):
                try:
                    self.events[obj["event_id"]] = (obj["company"], parse_timestamp(obj["call_time"]))
                except KeyError as exc:
                    raise DatasetError(f"{index}: missing field", line=lineno, field=exc.args[0]) from None

    def path_for(self, event_id: str) -> Path:
        return self.directory / f"{event_id}.txt"

    def has(self, event_id: str) -> bool:
        return self.path_for(event_id).is_file()

    def read(self, event_id: str) -> str:
        return self.path_for(event_id).read_text(encoding="utf-8")

    def prior_event(self, inst: MarketInstance) -> Optional[str]:
        """The event whose transcript may serve as ``inst``'s prior-quarter context.

        An explicit ``prior_event_id`` is audited; otherwise the latest
        same-company event with a transcript and a call time at or before the
        cutoff is chosen. Returns ``None`` when nothing qualifies.
        """
        if inst.prior_event_id is not None:
            self.audit(inst, inst.prior_event_id)
            return inst.prior_event_id
        best = None
        for event_id, (company, call_time) in self.events.items():
            if company != inst.company or event_id == inst.event_id:
                continue
            if call_time > inst.cutoff_time or not self.has(event_id):
                continue
            if best is None or (call_time, event_id) > best[0]:
                best = ((call_time, event_id), event_id)
        return best[1] if best else None

    def audit(self, inst: MarketInstance, event_id: str) -> None:
        """Reject a transcript that is the target call or postdates the cutoff."""
        if event_id == inst.event_id:
            raise LeakageError(f"{inst.instance_id}: prior transcript is the target call {event_id}")
        if event_id not in self.events:
            raise LeakageError(f"{inst.instance_id}: call time of transcript {event_id} is unknown")
        _, call_time = self.events[event_id]
        if call_time > inst.cutoff_time:
            raise LeakageError(
                f"{inst.instance_id}: transcript {event_id} ({format_timestamp(call_time)}) "
                f"postdates cutoff {format_timestamp(inst.cutoff_time)}"
            )
        if not self.has(event_id):
            raise ConfigurationError(f"{inst.instance_id}: transcript file for {event_id} is missing")
