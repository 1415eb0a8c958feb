"""Linearity benchmark: parse inputs of growing size and fit cost against size."""

from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .engine import available_backends, make_session
from .grammar import Grammar
from .grammar_text import parse_grammar_text
from .recovery import RecoveryConfig
from .treeio import collect_errors

__all__ = ["ARITHMETIC_GRAMMAR", "arithmetic_grammar", "arithmetic_input", "mutate",
           "BenchRow", "Fit", "BenchReport", "bench_linearity", "least_squares",
           "compare_backends", "report_csv"]

ARITHMETIC_GRAMMAR = """\
Expr <- Expr '+' Term / Term ;
Term <- [0-9]+ ;
"""


def arithmetic_grammar() -> Grammar:
    return parse_grammar_text(ARITHMETIC_GRAMMAR).resolve()


def arithmetic_input(size: int, rng: random.Random | None = None) -> str:
    """Digits and '+' alternating, exactly ``size`` chars.

    Even sizes get one two-digit operand at the end.
    """
    if size < 1:
        raise ValueError("size must be positive")
    rng = rng or random.Random(size)
    digits = rng.choices("0123456789", k=(size + 1) // 2)
    s = "+".join(digits)
    if len(s) < size:
        s += rng.choice("0123456789")
    return s


def mutate(text: str, rate: float, rng: random.Random) -> tuple[str, list[int]]:
    """Replace ``round(rate * len(text))`` distinct chars by '?'."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("error rate must be within [0, 1]")
    k = round(rate * len(text))
    where = sorted(rng.sample(range(len(text)), k)) if k else []
    chars = list(text)
    for i in where:
        chars[i] = "?"
    return "".join(chars), where


@dataclass(frozen=True)
class BenchRow:
    size: int
    errors: int
    wall_time: float
    body_evals: int
    error_span: int = 0


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


def least_squares(xs: Sequence[float], ys: Sequence[float]) -> Fit:
    if len(xs) != len(ys):
        raise ValueError("xs and ys differ in length")
    if len(xs) < 3:
        raise ValueError("a fit needs at least 3 points")
    if len(set(xs)) < 2:
        raise ValueError("all x values are equal")
    slope, intercept = statistics.linear_regression(xs, ys)
    r2 = 1.0 if len(set(ys)) < 2 else statistics.correlation(xs, ys) ** 2
    return Fit(slope, intercept, r2)


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    backend: str = ""

    @property
    def time_fit(self) -> Fit | None:
        if len(self.rows) < 3:
            return None
        return least_squares([r.size for r in self.rows], [r.wall_time for r in self.rows])

    @property
    def evals_fit(self) -> Fit | None:
        if len(self.rows) < 3:
            return None
        return least_squares([r.size for r in self.rows], [r.body_evals for r in self.rows])

    def ratios(self) -> list[float]:
        """Rule body evaluations per input char, one per row."""
        return [r.body_evals / r.size for r in self.rows]

    def ratio_spread(self) -> float:
        """(max - min) / min of the per-row evaluation ratios."""
        rs = self.ratios()
        return (max(rs) - min(rs)) / min(rs) if rs else 0.0

    def doubling_factors(self) -> list[float]:
        """evals(2n)/evals(n) for each consecutive pair of rows that doubles the size."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if b.size == 2 * a.size:
                out.append(b.body_evals / a.body_evals)
        return out


def bench_linearity(grammar: Grammar, sizes: Sequence[int],
                    generator: Callable[[int, random.Random], str] | None = None,
                    error_rate: float = 0.0, seed: int = 0,
                    config: RecoveryConfig | None = None,
                    backend: str | None = None) -> BenchReport:
    """Parse one generated input per size and record cost per row."""
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError("error rate must be within [0, 1]")
    generator = generator or arithmetic_input
    report = BenchReport()
    for size in sizes:
        rng = random.Random(f"{seed}:{size}")
        text = generator(size, rng)
        if error_rate:
            text, _ = mutate(text, error_rate, rng)
        session = make_session(grammar, text, config, backend)
        report.backend = session.backend
        t0 = time.perf_counter()
        root = session.parse()
        dt = time.perf_counter() - t0
        if root.len != len(text):
            raise AssertionError(f"root spans {root.len} of {len(text)} chars")
        errs = collect_errors(root)
        report.rows.append(BenchRow(len(text), len(errs), dt, session.stats["body_evals"],
                                    sum(e.len for e in errs)))
    return report


def compare_backends(grammar: Grammar | None = None, size: int = 20_000, repeat: int = 3,
                     error_rate: float = 0.0) -> dict[str, float]:
    """Best-of-``repeat`` wall time per available backend on one arithmetic input."""
    grammar = grammar or arithmetic_grammar()
    rng = random.Random(size)
    text = arithmetic_input(size, rng)
    if error_rate:
        text, _ = mutate(text, error_rate, rng)
    out = {}
    for name in available_backends():
        best = float("inf")
        for _ in range(repeat):
            s = make_session(grammar, text, None, name)
            t0 = time.perf_counter()
            s.parse()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    return out


def report_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "errors", "error_chars", "wall_time_s", "body_evals", "evals_per_char"])
    for r in report.rows:
        w.writerow([r.size, r.errors, r.error_span, f"{r.wall_time:.6f}", r.body_evals,
                    f"{r.body_evals / r.size:.4f}"])
    for name, fit in (("time", report.time_fit), ("evals", report.evals_fit)):
        if fit is not None:
            w.writerow([f"# fit {name}", f"slope={fit.slope:.6g}", f"intercept={fit.intercept:.6g}",
                        f"r2={fit.r2:.6f}"])
    return buf.getvalue()


if __name__ == "__main__":  # pragma: no cover
    import sys
    g = arithmetic_grammar()
    sizes = [1000 * 2 ** i for i in range(8)]
    for rate in (0.0, 0.01):
        rep = bench_linearity(g, sizes, error_rate=rate)
        sys.stdout.write(f"# backend={rep.backend} error_rate={rate}\n" + report_csv(rep))
    for name, t in compare_backends().items():
        print(f"# {name}: {t * 1000:.1f} ms")
