"""
CLI report models and text rendering.

Every command builds one pydantic report model. `--json` dumps it with
sorted keys and 2-space indentation; otherwise it is rendered as aligned
text tables. Content never depends on colour settings.
"""

import json
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel

from core.analysis.interop import InteropPair, SystemVerdict
from core.analysis.lcim import LcimLevel
from core.analysis.precedence import PrecedenceRelation
from core.engine.executor import TraceEntry
from core.engine.scenario import ScenarioResult
from core.model.holons import GenealogyNode
from core.model.types import Violation
from core.model.values import format_timestamp
from core.transform.mapping import TransformResult

HEADER_CHAR = "═"
ROW_CHAR = "─"
COL_SEP = "│"
CROSS = "┼"

GREEN = "\033[32m"
RED = "\033[31m"
RESET = "\033[0m"


# ============================================================================
# REPORT MODELS
# ============================================================================

class ViolationRow(BaseModel):
    code: str
    subject: str
    message: str


class ValidateReport(BaseModel):
    ok: bool
    violations: List[ViolationRow] = []


class InteropRow(BaseModel):
    process: str
    interoperable: bool
    unmatched: List[str] = []
    witnesses: Dict[str, str] = {}


class InteropReport(BaseModel):
    horizon: int
    overall: bool
    processes: List[InteropRow] = []


class LcimRow(BaseModel):
    process: str
    level: int
    name: str
    justification: List[str] = []


class PairRow(BaseModel):
    a: str
    b: str
    kind: str
    lcim: int
    flows: List[str] = []


class LcimReport(BaseModel):
    system_level: int
    processes: List[LcimRow] = []
    pairs: Optional[List[PairRow]] = None


class PrecedenceReport(BaseModel):
    horizon: int
    back_edges: List[str] = []
    pairs: List[List[str]] = []
    dot: Optional[str] = None


class UnmappedRow(BaseModel):
    kind: str
    id: str
    path: str


class TransformReport(BaseModel):
    target: str
    matched: int
    unmapped: List[UnmappedRow] = []
    out: Optional[str] = None
    document: Optional[str] = None


class RunRow(BaseModel):
    run: str
    process: str
    status: str
    instance: Optional[str] = None
    message: str = ""


class SimulateReport(BaseModel):
    scenario: str
    ok: bool
    runs: List[RunRow] = []
    log: str = ""


class GenealogyTree(BaseModel):
    holon: str
    instance: Optional[str] = None
    children: List["GenealogyTree"] = []


class TraceRow(BaseModel):
    instance: str
    start: str
    holon: str
    state: str


class GenealogyReport(BaseModel):
    holon: str
    tree: GenealogyTree
    leaves: List[str] = []
    trace: List[TraceRow] = []


GenealogyTree.model_rebuild()


def dump_json(report: BaseModel) -> str:
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ============================================================================
# BUILDERS
# ============================================================================

def validate_report(violations: Sequence[Violation]) -> ValidateReport:
    return ValidateReport(ok=not violations,
                          violations=[ViolationRow(code=v.code, subject=v.subject, message=v.message)
                                      for v in violations])


def interop_report(verdict: SystemVerdict, only: Optional[str] = None) -> InteropReport:
    rows = []
    for pid, v in sorted(verdict.verdicts.items()):
        if only is not None and pid != only:
            continue
        rows.append(InteropRow(
            process=pid,
            interoperable=v.interoperable,
            unmatched=[ref.token for ref in v.unmatched],
            witnesses={ref.token: w for ref, w in sorted(v.producers.items())},
        ))
    overall = all(r.interoperable for r in rows) if only is not None else verdict.overall
    return InteropReport(horizon=verdict.horizon, overall=overall, processes=rows)


def lcim_report(levels: Dict[str, LcimLevel], system_level: int,
                pairs: Optional[List[InteropPair]] = None) -> LcimReport:
    return LcimReport(
        system_level=system_level,
        processes=[LcimRow(process=pid, level=lv.level, name=lv.name, justification=lv.justification)
                   for pid, lv in sorted(levels.items())],
        pairs=None if pairs is None else [
            PairRow(a=p.a, b=p.b, kind=p.kind.value, lcim=p.lcim, flows=p.flows) for p in pairs
        ],
    )


def precedence_report(rel: PrecedenceRelation, dot: Optional[str] = None) -> PrecedenceReport:
    return PrecedenceReport(
        horizon=rel.horizon,
        back_edges=sorted(rel.back_edges),
        pairs=[[str(a), str(b)] for a, b in rel.sorted_pairs()],
        dot=dot,
    )


def transform_report(target: str, result: TransformResult, out: Optional[str],
                     document: Optional[str]) -> TransformReport:
    return TransformReport(
        target=target,
        matched=result.matched,
        unmapped=[UnmappedRow(kind=u.kind, id=u.id, path=u.path) for u in result.unmapped],
        out=out,
        document=document,
    )


def simulate_report(result: ScenarioResult) -> SimulateReport:
    return SimulateReport(
        scenario=result.scenario_id,
        ok=result.ok,
        runs=[RunRow(run=o.run_id, process=o.process, status=o.status.value,
                     instance=o.instance_id, message=o.message) for o in result.outcomes],
        log=result.log,
    )


def _tree(node: GenealogyNode) -> GenealogyTree:
    return GenealogyTree(holon=node.holon_id, instance=node.instance_id,
                         children=[_tree(c) for c in node.children])


def genealogy_report(root: GenealogyNode, trace: List[TraceEntry]) -> GenealogyReport:
    return GenealogyReport(
        holon=root.holon_id,
        tree=_tree(root),
        leaves=sorted(set(root.leaves())),
        trace=[TraceRow(instance=e.instance.id, start=format_timestamp(e.instance.start),
                        holon=e.holon_id, state=e.state_id) for e in trace],
    )


# ============================================================================
# TEXT RENDERING
# ============================================================================

class TextRenderer:
    def __init__(self, color: bool = False):
        self.color = color

    def verdict(self, ok: bool, yes: str = "yes", no: str = "NO") -> str:
        word = yes if ok else no
        if not self.color:
            return word
        return f"{GREEN if ok else RED}{word}{RESET}"

    def table(self, headers: Sequence[str], rows: Sequence[Sequence[str]],
              colored: Optional[Dict[int, Sequence[bool]]] = None) -> List[str]:
        """Aligned table; widths come from the plain text, colour is added after padding."""
        colored = colored or {}
        widths = [len(h) for h in headers]
        for row in rows:
            for i, text in enumerate(row):
                widths[i] = max(widths[i], len(text))

        def cell(text: str, col: int, flag: Optional[bool] = None) -> str:
            pad = " " * (widths[col] - len(text))
            if flag is None:
                return text + pad
            return self.verdict(flag, text, text) + pad

        out = [f" {COL_SEP} ".join(cell(h, i) for i, h in enumerate(headers)).rstrip(),
               f"{ROW_CHAR}{CROSS}{ROW_CHAR}".join(ROW_CHAR * w for w in widths)]
        for r, row in enumerate(rows):
            out.append(f" {COL_SEP} ".join(
                cell(text, i, colored[i][r] if i in colored else None) for i, text in enumerate(row)
            ).rstrip())
        return out

    def title(self, text: str) -> List[str]:
        return [text, HEADER_CHAR * len(text)]

    # ------------------------------------------------------------------
    def validate(self, report: ValidateReport) -> str:
        if report.ok:
            return self.verdict(True, "OK") + "\n"
        return "".join(f"{v.code} {v.subject} {v.message}\n" for v in report.violations)

    def interop(self, report: InteropReport) -> str:
        rows, flags = [], []
        for r in report.processes:
            witnesses = ", ".join(f"{item}<-{w}" for item, w in sorted(r.witnesses.items()))
            rows.append([r.process, "yes" if r.interoperable else "NO", ", ".join(r.unmatched) or "-",
                         witnesses or "-"])
            flags.append(r.interoperable)
        lines = self.title(f"INTEROPERABILITY (horizon {report.horizon})")
        lines += self.table(["Process", "Interoperable", "Unmatched", "Witnesses"], rows, {1: flags})
        lines.append("")
        lines.append(f"Overall: {self.verdict(report.overall, 'interoperable', 'NOT interoperable')}")
        return "\n".join(lines) + "\n"

    def lcim(self, report: LcimReport) -> str:
        rows = [[r.process, str(r.level), r.name, "; ".join(r.justification) or "-"] for r in report.processes]
        lines = self.title("LCIM LEVELS")
        lines += self.table(["Process", "Level", "Name", "Justification"], rows)
        lines.append("")
        lines.append(f"System level: {report.system_level}")
        if report.pairs is not None:
            lines.append("")
            lines += self.title("PROCESS PAIRS")
            lines += self.table(["A", "B", "Kind", "LCIM", "Flows"],
                                [[p.a, p.b, p.kind, str(p.lcim), ", ".join(p.flows)] for p in report.pairs])
        return "\n".join(lines) + "\n"

    def precedence(self, report: PrecedenceReport) -> str:
        if report.dot is not None:
            return report.dot
        lines = self.title(f"PRECEDENCE (horizon {report.horizon})")
        lines.append(f"Back edges: {', '.join(report.back_edges) or 'none'}")
        lines.append("")
        lines += [f"{a} < {b}" for a, b in report.pairs]
        return "\n".join(lines) + "\n"

    def transform(self, report: TransformReport) -> str:
        lines = []
        if report.document is not None:
            lines.append(report.document.rstrip("\n"))
        else:
            lines.append(f"Wrote {report.target} document to {report.out}")
        lines.append(f"Matched: {report.matched}")
        if report.unmapped:
            lines.append(f"Unmapped: {len(report.unmapped)}")
            lines += self.table(["Kind", "Id", "Path"], [[u.kind, u.id, u.path] for u in report.unmapped])
        else:
            lines.append("Unmapped: 0")
        return "\n".join(lines) + "\n"

    def simulate(self, report: SimulateReport) -> str:
        lines = [report.log.rstrip("\n"), ""]
        rows, flags = [], []
        for r in report.runs:
            status = {"committed": "COMMITTED", "rolled-back": "ROLLED BACK", "rejected": "REJECTED"}[r.status]
            rows.append([r.run, r.process, status, r.instance or "-"])
            flags.append(r.status == "committed")
        lines += self.table(["Run", "Process", "Status", "Instance"], rows, {2: flags})
        return "\n".join(lines) + "\n"

    def genealogy(self, report: GenealogyReport) -> str:
        lines: List[str] = []

        def walk(node: GenealogyTree, depth: int):
            via = f"  (via {node.instance})" if node.instance else ""
            lines.append(f"{'  ' * depth}{node.holon}{via}")
            for child in node.children:
                walk(child, depth + 1)

        walk(report.tree, 0)
        lines.append("")
        lines.append(f"Leaves: {', '.join(report.leaves)}")
        if report.trace:
            lines.append("")
            lines += self.table(["Start", "Instance", "Holon", "State"],
                                [[t.start, t.instance, t.holon, t.state] for t in report.trace])
        return "\n".join(lines) + "\n"
