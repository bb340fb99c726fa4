"""
Human-readable and machine-readable detector reports.

Each single-qubit POVM element is drawn as an arrow inside the unit sphere,
pointing along `(a1, a2, a3) / a0` with a width proportional to `a0`. Ideal
elements are unit arrows of weight 1/2; a positive element never reaches past
the sphere.
"""

import io
import logging
import math

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from mpl_toolkits.mplot3d import Axes3D  # noqa: F401
from tippo import Any, Dict, List, Optional, Tuple

from qdetco._bases import Value
from qdetco.detector_model import AVector, DetectorPovm, check_povm, reduce_detector
from qdetco.serialization import (
    REPORT_SCHEMA,
    bootstrap_to_json,
    diagnostics_to_json,
    povm_to_json,
)
from qdetco.tomography_engine import BootstrapReport, MleResult

__all__ = [
    "BlochSummary",
    "bloch_summary",
    "format_uncertainty",
    "parameter_table",
    "text_report",
    "json_report",
    "svg_report",
]

logger = logging.getLogger(__name__)

_SVG_SALT = "qdetco"
_ARROW_COLORS = ("#1f77b4", "#d62728")


class BlochSummary(Value):
    """Arrow describing one element of a single-qubit detector."""

    __slots__ = ("qubit", "outcome", "avector")
    __fields__ = ("qubit", "outcome", "avector")

    def __init__(self, qubit, outcome, avector):
        # type: (int, int, AVector) -> None
        self.qubit = int(qubit)
        self.outcome = int(outcome)
        self.avector = avector

    @property
    def direction(self):
        # type: () -> Tuple[float, float, float]
        """`(a1, a2, a3) / a0`."""
        return self.avector.bloch_vector

    @property
    def length(self):
        # type: () -> float
        """Arrow length, at most 1 for a positive element."""
        return float(np.linalg.norm(self.direction))

    @property
    def width(self):
        # type: () -> float
        """Arrow width, `a0`."""
        return self.avector.a0


def _single_qubit_detectors(p):
    # type: (DetectorPovm) -> List[DetectorPovm]
    if p.num_qubits == 1:
        return [p]
    return [reduce_detector(p, [q]) for q in range(p.num_qubits)]


def bloch_summary(p):
    # type: (DetectorPovm) -> Tuple[BlochSummary, ...]
    """
    Summarize a detector as arrows, two per qubit.

    Detectors on more than one qubit are first reduced to each qubit.

    :param p: Detector.
    :return: Summaries ordered by qubit, then outcome.
    """
    return tuple(
        BlochSummary(q, outcome, single.avector(outcome))
        for q, single in enumerate(_single_qubit_detectors(p))
        for outcome in (0, 1)
    )


def format_uncertainty(value, std):
    # type: (float, float) -> str
    """
    Format a value with its uncertainty in the last digit.

    >>> format_uncertainty(0.51813, 0.0012)
    '0.518(1)'

    :param value: Value.
    :param std: Standard deviation, plain 4-decimal value when not positive.
    :return: Text like `0.5181(5)`.
    """
    if not std > 0 or not math.isfinite(std):
        return "{:.4f}".format(value)
    decimals = -int(math.floor(math.log10(std)))
    uncertainty = int(round(std * 10**decimals))
    if uncertainty == 10:
        decimals -= 1
        uncertainty = 1
    if decimals <= 0:
        return "{:.0f}({:.0f})".format(value, std)
    return "{:.{}f}({})".format(value, decimals, uncertainty)


def parameter_table(p, report=None):
    # type: (DetectorPovm, Optional[BootstrapReport]) -> str
    """
    Tabulate the a-vectors of every qubit.

    Uncertainties are shown for single-qubit detectors with a bootstrap report.

    :param p: Detector.
    :param report: Bootstrap report of `p`.
    :return: Aligned text.
    """
    if report is not None and report.num_qubits != p.num_qubits:
        report = None
    rows = [("qubit", "outcome", "a0", "a1", "a2", "a3")]
    for summary in bloch_summary(p):
        values = summary.avector.as_array()
        if report is not None and p.num_qubits == 1:
            stds = report.std[summary.outcome]
        else:
            stds = np.zeros(4)
        rows.append(
            (str(summary.qubit), str(summary.outcome))
            + tuple(format_uncertainty(v, s) for v, s in zip(values, stds))
        )
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.rjust(width) for cell, width in zip(row, widths))
        for row in rows
    )


def text_report(p, report=None, result=None):
    # type: (DetectorPovm, Optional[BootstrapReport], Optional[MleResult]) -> str
    """
    Build a plain text report.

    :param p: Detector.
    :param report: Bootstrap report of `p`.
    :param result: Reconstruction result `p` came from.
    :return: Text ending with a newline.
    """
    validity = check_povm(p)
    lines = [
        "detector on {} qubit(s)".format(p.num_qubits),
        "completeness residual {:.3e}, min eigenvalue {:.3e}, {}".format(
            validity.completeness_residual,
            validity.min_eigenvalue,
            "valid" if validity.is_valid else "INVALID",
        ),
    ]
    if result is not None:
        lines.append(
            "reconstruction: {} iterations, step norm {:.3e}, {}".format(
                result.iterations,
                result.final_step_norm,
                "converged" if result.converged else "NOT converged",
            )
        )
    lines.extend(["", parameter_table(p, report), ""])
    for summary in bloch_summary(p):
        x, y, z = summary.direction
        lines.append(
            "qubit {} outcome {}: arrow ({:+.4f}, {:+.4f}, {:+.4f}) "
            "length {:.4f} width {:.4f}".format(
                summary.qubit, summary.outcome, x, y, z, summary.length, summary.width
            )
        )
    return "\n".join(lines) + "\n"


def json_report(
    p,  # type: DetectorPovm
    report=None,  # type: Optional[BootstrapReport]
    result=None,  # type: Optional[MleResult]
):
    # type: (...) -> Dict[str, Any]
    """
    Build a `qdt-report/1` document.

    The detector is embedded as a `qdt-povm/1` document and reads back
    bit-exactly.

    :param p: Detector.
    :param report: Bootstrap report of `p`.
    :param result: Reconstruction result `p` came from.
    :return: Document.
    """
    validity = check_povm(p)
    payload = {
        "schema": REPORT_SCHEMA,
        "povm": povm_to_json(p),
        "validity": {
            "completeness_residual": validity.completeness_residual,
            "min_eigenvalue": validity.min_eigenvalue,
            "is_valid": validity.is_valid,
        },
        "bloch": [
            {
                "qubit": s.qubit,
                "outcome": s.outcome,
                "avector": [float(v) for v in s.avector.as_array()],
                "direction": list(s.direction),
                "length": s.length,
                "width": s.width,
            }
            for s in bloch_summary(p)
        ],
    }  # type: Dict[str, Any]
    if report is not None:
        payload["bootstrap"] = bootstrap_to_json(report)
    if result is not None:
        payload["diagnostics"] = diagnostics_to_json(result)
    return payload


def _draw_sphere(axes):
    # type: (Any) -> None
    u = np.linspace(0, 2 * np.pi, 25)
    v = np.linspace(0, np.pi, 13)
    x = np.outer(np.cos(u), np.sin(v))
    y = np.outer(np.sin(u), np.sin(v))
    z = np.outer(np.ones(u.size), np.cos(v))
    axes.plot_wireframe(x, y, z, rstride=2, cstride=2, color="0.8", linewidth=0.5)
    span = np.array([-1.0, 1.0])
    for line in ((span, 0 * span, 0 * span), (0 * span, span, 0 * span)):
        axes.plot(*line, color="0.5", linewidth=0.8)
    axes.plot(0 * span, 0 * span, span, color="0.5", linewidth=0.8)
    for label, position in zip("xyz", 1.2 * np.eye(3)):
        axes.text(*position, label, ha="center", va="center")
    axes.set_xlim(-1, 1)
    axes.set_ylim(-1, 1)
    axes.set_zlim(-1, 1)
    axes.set_axis_off()


def _draw_arrow(axes, summary):
    # type: (Any, BlochSummary) -> None
    direction = np.array(summary.direction)
    length = summary.length
    color = _ARROW_COLORS[summary.outcome]
    if length > 1.0:
        logger.warning(
            "qubit %d outcome %d arrow length %.4f exceeds 1",
            summary.qubit,
            summary.outcome,
            length,
        )
        direction = direction / length
    if length < 1e-12:
        size = 40 * max(summary.width, 0.05)
        axes.scatter([0.0], [0.0], [0.0], color=color, s=size)
        return
    axes.quiver(
        0.0,
        0.0,
        0.0,
        *direction,
        color=color,
        linewidth=1.0 + 8.0 * max(summary.width, 0.0),
        arrow_length_ratio=0.15,
    )


def svg_report(p):
    # type: (DetectorPovm) -> str
    """
    Draw every qubit's detector as arrows in a sphere.

    Output is deterministic: the SVG hash salt is fixed and no date is stored.

    :param p: Detector.
    :return: SVG document.
    """
    summaries = bloch_summary(p)
    num_qubits = p.num_qubits
    with matplotlib.rc_context({"svg.hashsalt": _SVG_SALT, "svg.fonttype": "path"}):
        figure = Figure(figsize=(3.0 * num_qubits, 3.2))
        for q in range(num_qubits):
            axes = figure.add_subplot(1, num_qubits, q + 1, projection="3d")
            _draw_sphere(axes)
            for summary in summaries:
                if summary.qubit == q:
                    _draw_arrow(axes, summary)
            axes.set_title("qubit {}".format(q))
        buffer = io.StringIO()
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()
