"""
Reproduction runner - runs every experiment in sequence and collects results.

Writes a timestamped Markdown report, the raw results as JSON and the
theorem table as CSV under the output directory.
"""

import json
import logging
import sys
import time
from datetime import datetime
from pathlib import Path

import pandas as pd

from .constructions import (
    PARTIAL_BY_TOTAL_EXACT,
    ConstructionKind,
    FlipStrategy,
    StarMode,
    build_family,
    proofcheck_thm1_upper,
    thm1_shattered_set,
    vc_partial_by_total_bounds,
    vc_total_by_partial,
    verify_property_star,
)
from .enumeration import PARTIAL_ORDER_CAP, FamilySpec
from .errors import OrderVCError
from .shattering import SearchBudget, vc_dimension

logger = logging.getLogger(__name__)

EXACT_TOTAL_BY_PARTIAL_MAX_N = 4
RIGIDITY_MAX_N = 5
EXHAUSTIVE_STAR_PARTS = 14
SAMPLED_STAR_COUNT = 100_000
PARTIAL_BY_TOTAL_BUDGET = 60.0


def _case(n):
    return str(n) if n <= 3 else "≥4"


class ReproductionRunner:
    def __init__(
        self,
        max_n=6,
        output_dir="reproduction_results",
        threads=1,
        seed=None,
        stream=None,
        budget_seconds=PARTIAL_BY_TOTAL_BUDGET,
    ):
        self.max_n = max_n
        self.budget_seconds = budget_seconds
        self.threads = threads
        self.seed = 0 if seed is None else seed
        self.stream = stream or sys.stdout

        self.results_dir = Path(output_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.experiment_dir = self.results_dir / f"reproduction_{self.timestamp}"
        self.experiment_dir.mkdir(exist_ok=True)

        self.results = {
            "metadata": {
                "start_time": datetime.now().isoformat(),
                "max_n": max_n,
                "threads": threads,
                "seed": self.seed,
            },
            "theorem1": [],
            "rigidity": [],
            "theorem2": {"bounds": [], "constructions": []},
            "proofcheck": [],
            "summary": {},
        }

    def say(self, text=""):
        print(text, file=self.stream)

    def print_header(self, title):
        self.say("\n" + "=" * 60)
        self.say(f"  {title}")
        self.say("=" * 60)

    def mark(self, ok, text):
        self.say(f"  {'✓' if ok else '✗'} {text}")

    # -- experiments --------------------------------------------------------

    def run_theorem1_table(self):
        """Total orders shattered by partial orders: exact for small n, constructive above."""
        self.print_header("Step 1: total orders shattered by partial orders")
        for n in range(1, self.max_n + 1):
            expected = vc_total_by_partial(n)
            if n <= EXACT_TOTAL_BY_PARTIAL_MAX_N:
                report = vc_dimension(FamilySpec.total(n), FamilySpec.partial(n), threads=self.threads)
                ok = report.dimension == expected and report.search_complete
                row = {
                    "case": _case(n), "n": n, "expected": expected, "computed": report.dimension,
                    "method": "exact search", "passed": ok, "seconds": round(report.elapsed_seconds, 3),
                }
                self.mark(ok, f"n={n}: exact dimension {report.dimension} (expected {expected})")
            else:
                fam, orders = thm1_shattered_set(n)
                mode = (
                    StarMode.exhaustive()
                    if len(fam.parts) <= EXHAUSTIVE_STAR_PARTS
                    else StarMode.sampled(SAMPLED_STAR_COUNT, self.seed)
                )
                started = time.monotonic()
                star = verify_property_star(fam, mode=mode, threads=self.threads, ground=orders)
                ok = star.passed and len(orders) == expected
                row = {
                    "case": _case(n), "n": n, "expected": expected, "computed": len(orders),
                    "method": f"construction ({mode.kind}, {star.tested} subsets)", "passed": ok,
                    "seconds": round(time.monotonic() - started, 3),
                }
                self.mark(ok, f"n={n}: {len(orders)} orders shattered, {len(star.failures)} failures")
            self.results["theorem1"].append(row)

    def run_rigidity(self):
        self.print_header("Step 2: total orders shattered by total orders")
        for n in range(2, min(self.max_n, RIGIDITY_MAX_N) + 1):
            report = vc_dimension(FamilySpec.total(n), FamilySpec.total(n), threads=self.threads)
            ok = report.dimension == 1 and report.search_complete
            self.results["rigidity"].append({"n": n, "computed": report.dimension, "passed": ok})
            self.mark(ok, f"n={n}: dimension {report.dimension}")

    def run_theorem2(self):
        self.print_header("Step 3: partial orders shattered by total orders")
        for n in range(1, min(self.max_n, EXACT_TOTAL_BY_PARTIAL_MAX_N) + 1):
            lower, upper = vc_partial_by_total_bounds(n)
            budget = SearchBudget(seconds=self.budget_seconds)
            report = vc_dimension(FamilySpec.partial(n), FamilySpec.total(n), budget=budget, threads=self.threads)
            exact = PARTIAL_BY_TOTAL_EXACT.get(n)
            ok = lower <= report.dimension <= upper
            if exact is not None:
                ok = ok and report.search_complete and report.dimension == exact
            self.results["theorem2"]["bounds"].append({
                "n": n, "lower": lower, "upper": upper, "expected": exact, "computed": report.dimension,
                "search_complete": report.search_complete, "passed": ok,
            })
            suffix = "" if report.search_complete else " (budget spent, lower bound)"
            self.mark(
                ok,
                f"n={n}: dimension {report.dimension} within [{lower}, {upper}], expected {exact}{suffix}",
            )

        for which in (ConstructionKind.THM2_H, ConstructionKind.THM2_G):
            for n in range(4, self.max_n + 1):
                fam = build_family(which, n)
                mode = (
                    StarMode.exhaustive()
                    if len(fam.parts) <= EXHAUSTIVE_STAR_PARTS
                    else StarMode.sampled(SAMPLED_STAR_COUNT // 10, self.seed)
                )
                for strategy in FlipStrategy:
                    star = verify_property_star(fam, mode=mode, strategy=strategy, threads=self.threads)
                    distinct = len(set(fam.closed_parts)) == len(fam.parts)
                    ok = star.passed and distinct
                    self.results["theorem2"]["constructions"].append({**star.to_dict(), "passed": ok})
                    self.mark(
                        ok,
                        f"{which.value} n={n} {strategy.value}: {len(fam.parts)} parts, "
                        f"{star.tested} subsets, {len(star.failures)} failures, {star.fallbacks} fallbacks",
                    )

    def run_proofcheck(self):
        self.print_header("Step 4: upper-bound proof checker")
        for n in range(4, min(self.max_n, PARTIAL_ORDER_CAP) + 1):
            _, orders = thm1_shattered_set(n)
            try:
                report = proofcheck_thm1_upper(orders, FamilySpec.partial(n))
            except OrderVCError as exc:
                self.results["proofcheck"].append({"n": n, "passed": False, "error": str(exc)})
                self.mark(False, f"n={n}: {exc}")
                continue
            self.results["proofcheck"].append({**report.to_dict(), "passed": report.passed})
            checks = ", ".join(f"{k}={v}" for k, v in report.checks.items())
            self.mark(report.passed, f"n={n}: |E(G)| = {report.edge_count}; {checks}")

    # -- reporting ----------------------------------------------------------

    def generate_summary_report(self):
        self.print_header("Step 5: report")
        sections = [
            self.results["theorem1"],
            self.results["rigidity"],
            self.results["theorem2"]["bounds"],
            self.results["theorem2"]["constructions"],
            self.results["proofcheck"],
        ]
        total = sum(len(s) for s in sections)
        passed = sum(1 for s in sections for row in s if row.get("passed"))
        self.results["summary"] = {"experiments": total, "passed": passed, "all_passed": passed == total}

        table = pd.DataFrame(self.results["theorem1"])
        self.say(table.to_string(index=False) if not table.empty else "(no rows)")

        report = f"""# Order VC-dimension reproduction

## Run
- Date: {self.results['metadata']['start_time']}
- Largest n: {self.max_n}
- Threads: {self.threads}
- Seed: {self.seed}

## Total orders shattered by partial orders
"""
        if not table.empty:
            report += "| case | n | expected | computed | method | passed |\n"
            report += "|------|---|----------|----------|--------|--------|\n"
            for row in self.results["theorem1"]:
                report += (
                    f"| {row['case']} | {row['n']} | {row['expected']} | {row['computed']} "
                    f"| {row['method']} | {'✓' if row['passed'] else '✗'} |\n"
                )

        report += "\n## Total orders shattered by total orders\n"
        for row in self.results["rigidity"]:
            report += f"- n={row['n']}: {row['computed']}\n"

        report += "\n## Partial orders shattered by total orders\n"
        report += "| n | lower | upper | expected | computed | complete |\n"
        report += "|---|-------|-------|----------|----------|----------|\n"
        for row in self.results["theorem2"]["bounds"]:
            report += (
                f"| {row['n']} | {row['lower']} | {row['upper']} | {row['expected']} | {row['computed']} "
                f"| {row['search_complete']} |\n"
            )
        report += "\n| family | n | strategy | parts | subsets | failures | fallbacks |\n"
        report += "|--------|---|----------|-------|---------|----------|-----------|\n"
        for row in self.results["theorem2"]["constructions"]:
            report += (
                f"| {row['kind']} | {row['n']} | {row['strategy']} | {row['parts']} | {row['tested']} "
                f"| {len(row['failures'])} | {row['fallbacks']} |\n"
            )

        report += "\n## Proof checker\n"
        for row in self.results["proofcheck"]:
            if "checks" in row:
                checks = ", ".join(f"{k}: {v}" for k, v in row["checks"].items())
                report += f"- n={row['n']}: |E(G)| = {row['edge_count']} ({checks})\n"
            else:
                report += f"- n={row['n']}: {row['error']}\n"

        summary = self.results["summary"]
        report += f"""
## Summary
- Experiments: {summary['experiments']}
- Passed: {summary['passed']}

---
*Finished: {datetime.now().isoformat()}*
"""
        report_file = self.experiment_dir / "reproduction_report.md"
        report_file.write_text(report, encoding="utf-8")
        self.say(f"report: {report_file}")

        json_file = self.experiment_dir / "reproduction_results.json"
        json_file.write_text(json.dumps(self.results, indent=2, default=str), encoding="utf-8")
        self.say(f"raw data: {json_file}")

        csv_file = self.experiment_dir / "theorem1_table.csv"
        table.to_csv(csv_file, index=False)
        self.say(f"table: {csv_file}")

    def run_full_reproduction(self):
        self.say("=" * 70)
        self.say("    Order VC-dimension reproduction")
        self.say("=" * 70)
        start_time = time.time()

        self.run_theorem1_table()
        self.run_rigidity()
        self.run_theorem2()
        self.run_proofcheck()

        self.results["metadata"]["elapsed_seconds"] = round(time.time() - start_time, 3)
        self.generate_summary_report()

        summary = self.results["summary"]
        self.say(f"\n{summary['passed']}/{summary['experiments']} experiments passed "
                 f"in {self.results['metadata']['elapsed_seconds']}s")
        logger.info("reproduction finished: %s", summary)
        return self.results
