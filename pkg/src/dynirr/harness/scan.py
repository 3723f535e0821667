"""Prime-window scans, the 64 S / t^2 bound check, and the decay table."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Optional

from ..dynamics import classify
from ..errors import DynirrError
from ..exactalg import IntPoly
from ..modp import DEFAULT_RABIN_CAP, Eliminated, StabilityVerdict, required_sign, stability_scan_single
from ..sieve import build_window_sets, compute_S, primes_in

CHUNK = 1 << 16
DEFAULT_DEPTH = 16
THREADS_ENV = "DYNIRR_THREADS"


class ConfigError(DynirrError):
    pass


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass
class ScanConfig:
    poly: IntPoly
    q_lo: int
    q_hi: int
    depth: int = DEFAULT_DEPTH
    rabin_cap: int = DEFAULT_RABIN_CAP
    threads: Optional[int] = None
    out_path: Optional[Path] = None

    def __post_init__(self):
        if self.threads is None:
            self.threads = default_threads()
        if not 3 <= self.q_lo <= self.q_hi:
            raise ConfigError(f"need 3 <= q_lo <= q_hi, got [{self.q_lo}, {self.q_hi}]")
        if self.depth < 2:
            raise ConfigError("depth must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.poly.degree < 2:
            raise ConfigError("the polynomial must have degree >= 2")


@dataclass
class ScanSummary:
    poly: str
    q_lo: int
    q_hi: int
    depth: int
    rabin_cap: int
    primes_tested: int = 0
    bad_reduction_count: int = 0
    survivors: int = 0
    eliminated_histogram: dict = field(default_factory=dict)
    reason_histogram: dict = field(default_factory=dict)
    rabin_levels: int = 0
    class_info: Optional[dict] = None

    def add(self, v: StabilityVerdict):
        self.primes_tested += 1
        if v.bad_reduction:
            self.bad_reduction_count += 1
        elif isinstance(v.outcome, Eliminated):
            n = v.outcome.at_n
            self.eliminated_histogram[n] = self.eliminated_histogram.get(n, 0) + 1
            r = v.outcome.reason.value
            self.reason_histogram[r] = self.reason_histogram.get(r, 0) + 1
        else:
            self.survivors += 1

    def check_conservation(self):
        total = self.survivors + sum(self.eliminated_histogram.values()) + self.bad_reduction_count
        assert total == self.primes_tested, "scan summary does not add up"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eliminated_histogram"] = {str(k): v for k, v in sorted(self.eliminated_histogram.items())}
        d["reason_histogram"] = dict(sorted(self.reason_histogram.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScanSummary":
        d = dict(d)
        d["eliminated_histogram"] = {int(k): v for k, v in d.get("eliminated_histogram", {}).items()}
        return cls(**d)


def _scan_chunk(args) -> list:
    coeffs, lo, hi, depth, cap = args
    f = IntPoly(coeffs)
    return [stability_scan_single(f, p, depth, cap) for p in primes_in(lo, hi)]


def _chunks(cfg: ScanConfig):
    start = cfg.q_lo
    while start <= cfg.q_hi:
        stop = min(start + CHUNK - 1, cfg.q_hi)
        yield (cfg.poly.coeffs, start, stop, cfg.depth, cfg.rabin_cap)
        start = stop + 1


def iter_scan(cfg: ScanConfig) -> Iterator[StabilityVerdict]:
    """Verdicts for every prime of the window, ascending in p."""
    if cfg.threads == 1:
        for job in _chunks(cfg):
            yield from _scan_chunk(job)
        return
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        # map() returns chunk results in submission order
        for batch in pool.map(_scan_chunk, _chunks(cfg)):
            yield from batch


def summary_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + ".summary.json")


def record_line(v: StabilityVerdict) -> str:
    return json.dumps(v.record(), separators=(", ", ": "))


def run_scan(cfg: ScanConfig):
    """Scan the window; returns (summary, verdicts).

    With ``out_path`` set, records go to that JSONL file as they are produced
    and the summary is written next to it as ``<stem>.summary.json``.
    """
    info = classify(cfg.poly)
    summary = ScanSummary(str(cfg.poly), cfg.q_lo, cfg.q_hi, cfg.depth, cfg.rabin_cap,
                          class_info=info.to_dict())
    d = cfg.poly.degree
    summary.rabin_levels = max((n for n in range(1, cfg.depth + 1) if d**n <= cfg.rabin_cap), default=0)
    verdicts = []
    sink = open(cfg.out_path, "w") if cfg.out_path else None
    try:
        last = 0
        for v in iter_scan(cfg):
            assert v.p > last
            last = v.p
            summary.add(v)
            verdicts.append(v)
            if sink:
                sink.write(record_line(v) + "\n")
    finally:
        if sink:
            sink.close()
    summary.check_conservation()
    if cfg.out_path:
        summary_path(cfg.out_path).write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    return summary, verdicts


def read_records(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- bound check --------------------------------------------------------------


@dataclass
class BoundReport:
    poly: str
    q_lo: int
    q_hi: int
    N_param: int
    t: int
    M_set: tuple
    S: int
    P_char: int
    rhs: Fraction
    holds: bool
    char_survivors: tuple

    def to_dict(self) -> dict:
        return {
            "poly": self.poly, "q_lo": self.q_lo, "q_hi": self.q_hi,
            "N_param": self.N_param, "t": self.t, "M_set": list(self.M_set),
            "S": self.S, "P_char": self.P_char, "bound": str(self.rhs),
            "bound_float": float(self.rhs), "holds": self.holds,
        }


def bound_check(f: IntPoly, q_lo: int, q_hi: int, N_param: int, t: int) -> BoundReport:
    """Count good primes whose characters over M are all the forced sign and
    compare with 64 S / t^2; each such prime contributes #M^2 >= t^2/64 to S."""
    ws = build_window_sets(f, N_param, t)
    res = compute_S(f, q_lo, q_hi, ws, "direct")
    m = len(ws.M_set)
    uniform = tuple(p for p, inner in res.per_prime.items() if inner == required_sign(f, p) * m)
    rhs = Fraction(64 * res.S, t * t)
    holds = len(uniform) <= rhs
    if not holds:
        raise AssertionError(f"P_char = {len(uniform)} > 64 S / t^2 = {rhs}")
    return BoundReport(str(f), q_lo, q_hi, N_param, t, ws.M_set, res.S, len(uniform), rhs,
                       holds, uniform)


# --- decay table --------------------------------------------------------------

DECAY_COLUMNS = ["Q", "survivors", "ratio", "ref_logloglog", "ref_loglog", "ref_log"]


def _inv_log_iter(q: float, k: int) -> Optional[float]:
    x = q
    for _ in range(k):
        if x <= 1:
            return None
        x = math.log(x)
    return 1 / x if x > 0 else None


def decay_rows(summaries: Iterable[ScanSummary]) -> list:
    rows = []
    for s in sorted(summaries, key=lambda s: s.q_lo):
        Q = s.q_lo
        rows.append({
            "Q": Q,
            "survivors": s.survivors,
            "ratio": s.survivors * math.log(Q) / Q,
            "ref_logloglog": _inv_log_iter(Q, 3),
            "ref_loglog": _inv_log_iter(Q, 2),
            "ref_log": _inv_log_iter(Q, 1),
        })
    ratios = [r["ratio"] for r in rows]
    if any(b > a for a, b in zip(ratios, ratios[1:])):
        warnings.warn("survivor ratio is not non-increasing over the Q grid", stacklevel=2)
    return rows


def decay_report(summaries: Iterable[ScanSummary]) -> str:
    """CSV text with one row per scanned window, ordered by Q."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=DECAY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in decay_rows(summaries):
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


def load_summary(path) -> ScanSummary:
    """Accepts a summary JSON file or the JSONL it sits next to."""
    path = Path(path)
    if not path.name.endswith(".summary.json"):
        path = summary_path(path)
    return ScanSummary.from_dict(json.loads(path.read_text()))
