"""Deterministic diagram-text emission for package views.

`render_view` draws a plain package diagram; `render_conformance` draws
the planned architecture annotated with checking results: missing
elements filled gray (#D3D3D3), present non-composable elements blue
(#3498DB), present composable elements left white, conforming
communications as black dash-dot arrows and drifts as red ones. Output
is plain text for PlantUML; no renderer is ever invoked.
"""

from __future__ import annotations

from .constraints import ConformanceReport, FindingStatus
from .diffing import DiffResult
from .kinds import COMPOSABLE_KINDS
from .model import PackageNode, PackageView

GRAY_FILL = "#D3D3D3"
BLUE_FILL = "#3498DB"
CONFORMING_ARROW = ".[#black].>"
DRIFT_ARROW = ".[#red].>"

_LEGEND = [
    "legend",
    f"  {GRAY_FILL} package : abstraction missing from the current architecture",
    f"  {BLUE_FILL} package : non-composable abstraction present in the architecture",
    "  white package : composable abstraction present in the architecture",
    f"  {CONFORMING_ARROW} arrow : conforming communication",
    f"  {DRIFT_ARROW} arrow : architectural drift",
    "end legend",
]


class ConformanceInputMismatch(ValueError):
    """Raised when diff and report stem from different architectures."""


def _emit_package(
    node: PackageNode, indent: int, fills: dict[str, str], out: list[str]
) -> None:
    pad = "  " * indent
    fill = fills.get(node.id, "")
    suffix = f" {fill}" if fill else ""
    header = f'{pad}package "{node.name}" <<{node.stereotype.value}>>{suffix}'
    children = sorted(node.children, key=lambda child: (child.name, child.id))
    if not children:
        out.append(header)
        return
    out.append(header + " {")
    for child in children:
        _emit_package(child, indent + 1, fills, out)
    out.append(f"{pad}}}")


def render_view(view: PackageView) -> str:
    """Render a package diagram: nested packages plus dashed dependencies."""
    out = ["@startuml"]
    for root in sorted(view.packages, key=lambda node: (node.name, node.id)):
        _emit_package(root, 0, {}, out)
    names = {node.id: node.name for node in view.all_packages()}
    arrows = sorted(
        {(names[client], names[supplier]) for client, supplier in view.dependencies}
    )
    for client, supplier in arrows:
        out.append(f'"{client}" ..> "{supplier}"')
    out.append("@enduml")
    return "\n".join(out) + "\n"


def render_conformance(
    pa_view: PackageView, diff: DiffResult, report: ConformanceReport
) -> str:
    """Render the planned architecture annotated with drifts.

    The diagram keeps the planned shape: every planned element appears,
    filled by its conformance status. Satisfied require checks appear as
    black dash-dot arrows, violated communication and domain checks (and
    undeclared interactions) as red ones.
    """
    if (
        diff.pa_hash is not None
        and report.pa_hash is not None
        and diff.pa_hash != report.pa_hash
    ):
        raise ConformanceInputMismatch(
            "diff and report were produced from different planned architectures"
        )

    missing = set(diff.missing_elements)
    fills: dict[str, str] = {}
    for node in pa_view.all_packages():
        if node.id in missing:
            fills[node.id] = GRAY_FILL
        elif node.stereotype not in COMPOSABLE_KINDS:
            fills[node.id] = BLUE_FILL

    arrows: set[tuple[str, str, str]] = set()
    for finding in report.findings:
        if finding.object is None:
            continue
        if finding.status is FindingStatus.PASS:
            if finding.constraint_id.startswith(("access_", "domain_access_")):
                arrows.add((finding.subject, finding.object, CONFORMING_ARROW))
        else:
            arrows.add((finding.subject, finding.object, DRIFT_ARROW))

    out = ["@startuml"]
    for root in sorted(pa_view.packages, key=lambda node: (node.name, node.id)):
        _emit_package(root, 0, fills, out)
    for client, supplier, arrow in sorted(arrows):
        out.append(f'"{client}" {arrow} "{supplier}"')
    out.extend(_LEGEND)
    out.append("@enduml")
    return "\n".join(out) + "\n"
