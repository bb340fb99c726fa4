"""Comparison of detectors characterized under different conditions."""

import logging

import numpy as np
from tippo import List, Mapping, Optional, Sequence, Tuple, Union

from qdetco import config
from qdetco._bases import Value, frozen_array
from qdetco.detector_model import DetectorPovm, detector_distance, reduce_detector
from qdetco.tomography_engine import BootstrapReport
from qdetco.validation import ValidationError, assert_positive

__all__ = [
    "ComparisonTable",
    "CrosstalkFlag",
    "conditioned_table",
    "individual_vs_parallel",
    "flag_crosstalk",
    "fluctuation_scale_from_bootstrap",
    "format_table",
]

logger = logging.getLogger(__name__)


class ComparisonTable(Value):
    """
    Table of detector distances.

    Absent entries, including the diagonal of square tables, are NaN; the
    off-diagonal ones are listed in `missing`.
    """

    __slots__ = ("rows", "cols", "distances", "fluctuation_scale", "missing")
    __fields__ = ("rows", "cols", "distances", "fluctuation_scale", "missing")

    def __init__(
        self,
        rows,  # type: Sequence[str]
        cols,  # type: Sequence[str]
        distances,  # type: np.ndarray
        fluctuation_scale=config.FLUCTUATION_SCALE,  # type: float
        missing=(),  # type: Sequence[Tuple[str, str]]
    ):
        # type: (...) -> None
        """
        :param rows: Row labels.
        :param cols: Column labels.
        :param distances: Distances of shape `(len(rows), len(cols))`.
        :param fluctuation_scale: Typical distance due to statistical noise.
        :param missing: Off-diagonal entries with no data.
        :raise ValidationError: Wrong shape or negative distances.
        """
        rows = tuple(str(r) for r in rows)
        cols = tuple(str(c) for c in cols)
        distances = np.asarray(distances, dtype=float)
        if distances.shape != (len(rows), len(cols)):
            error = "distances of shape {!r} don't match {} rows and {} cols".format(
                distances.shape, len(rows), len(cols)
            )
            raise ValidationError(error)
        if (distances[~np.isnan(distances)] < 0).any():
            raise ValidationError("distances must be non-negative")
        assert_positive("fluctuation_scale", fluctuation_scale, allow_zero=True)
        self.rows = rows
        self.cols = cols
        self.distances = frozen_array(distances)
        self.fluctuation_scale = float(fluctuation_scale)
        self.missing = tuple((str(r), str(c)) for r, c in missing)

    def entry(self, row, col):
        # type: (Union[int, str], Union[int, str]) -> float
        """
        Get one distance.

        :param row: Row label.
        :param col: Column label.
        :return: Distance, NaN when absent.
        """
        r = self.rows.index(str(row))
        return float(self.distances[r, self.cols.index(str(col))])


class CrosstalkFlag(Value):
    """Comparison of one table entry against the crosstalk threshold."""

    __slots__ = ("qubit_pair", "distance", "threshold")
    __fields__ = ("qubit_pair", "distance", "threshold")

    def __init__(self, qubit_pair, distance, threshold):
        # type: (Tuple[str, str], float, float) -> None
        """
        :param qubit_pair: Row and column labels of the entry.
        :param distance: Distance.
        :param threshold: Threshold.
        """
        row, col = qubit_pair
        self.qubit_pair = (str(row), str(col))
        self.distance = float(distance)
        self.threshold = float(threshold)

    @property
    def flagged(self):
        # type: () -> bool
        """Whether the distance exceeds the threshold."""
        return self.distance > self.threshold


def conditioned_table(
    two_qubit_povms,  # type: Mapping[Tuple[int, int], DetectorPovm]
    reference,  # type: Mapping[int, DetectorPovm]
    fluctuation_scale=config.FLUCTUATION_SCALE,  # type: float
):
    # type: (...) -> ComparisonTable
    """
    Compare detectors reduced from pair tomography to single-qubit references.

    The POVM of pair `(i, j)` has qubit `i` first. Entry `(i, j)` is the distance
    between its reduction to qubit `i` and the reference of `i`; entry `(j, i)`
    comes from the reduction to qubit `j`, unless pair `(j, i)` is also given.

    :param two_qubit_povms: Two-qubit detectors per qubit pair.
    :param reference: Single-qubit detectors per qubit.
    :param fluctuation_scale: Typical distance due to statistical noise.
    :return: Square table over the reference qubits.
    :raise ValidationError: A pair names an unknown qubit or isn't two-qubit.
    """
    qubits = sorted(reference)
    positions = {q: i for i, q in enumerate(qubits)}
    distances = np.full((len(qubits), len(qubits)), np.nan)
    for (i, j), povm in sorted(two_qubit_povms.items()):
        if i not in positions or j not in positions or i == j:
            error = "pair {!r} doesn't name two reference qubits".format((i, j))
            raise ValidationError(error)
        if povm.num_qubits != 2:
            error = "pair {!r} detector acts on {} qubits".format(
                (i, j), povm.num_qubits
            )
            raise ValidationError(error)
        distances[positions[i], positions[j]] = detector_distance(
            reduce_detector(povm, [0]), reference[i]
        )
        if (j, i) not in two_qubit_povms:
            distances[positions[j], positions[i]] = detector_distance(
                reduce_detector(povm, [1]), reference[j]
            )
    missing = [
        (i, j)
        for i in qubits
        for j in qubits
        if i != j and np.isnan(distances[positions[i], positions[j]])
    ]
    if missing:
        logger.info("conditioned table has no data for %d entries", len(missing))
    return ComparisonTable(qubits, qubits, distances, fluctuation_scale, missing)


def individual_vs_parallel(
    ind,  # type: Mapping[int, DetectorPovm]
    par,  # type: Mapping[int, DetectorPovm]
    fluctuation_scale=config.FLUCTUATION_SCALE,  # type: float
):
    # type: (...) -> ComparisonTable
    """
    Compare detectors characterized one qubit at a time and all at once.

    :param ind: Single-qubit detectors from individual tomography.
    :param par: Single-qubit detectors from parallel tomography.
    :param fluctuation_scale: Typical distance due to statistical noise.
    :return: Table with one `ind-par` column.
    :raise ValidationError: The qubits differ.
    """
    if set(ind) != set(par):
        error = "individual qubits {} differ from parallel qubits {}".format(
            sorted(ind), sorted(par)
        )
        raise ValidationError(error)
    qubits = sorted(ind)
    distances = [[detector_distance(ind[q], par[q])] for q in qubits]
    return ComparisonTable(
        qubits, ("ind-par",), np.reshape(distances, (len(qubits), 1)), fluctuation_scale
    )


def flag_crosstalk(t, threshold_multiplier=config.CROSSTALK_MULTIPLIER):
    # type: (ComparisonTable, float) -> List[CrosstalkFlag]
    """
    Compare table entries with a multiple of the fluctuation scale.

    :param t: Table.
    :param threshold_multiplier: Threshold in units of the fluctuation scale.
    :return: One flag per present entry, row-major.
    :raise ValidationError: Non-positive fluctuation scale.
    """
    assert_positive("fluctuation_scale", t.fluctuation_scale)
    threshold = threshold_multiplier * t.fluctuation_scale
    flags = [
        CrosstalkFlag((row, col), t.distances[r, c], threshold)
        for r, row in enumerate(t.rows)
        for c, col in enumerate(t.cols)
        if not np.isnan(t.distances[r, c])
    ]
    for flag in flags:
        if flag.flagged:
            logger.info(
                "entry %s exceeds crosstalk threshold: %.4f > %.4f",
                flag.qubit_pair,
                flag.distance,
                threshold,
            )
    return flags


def fluctuation_scale_from_bootstrap(reports):
    # type: (Union[Mapping[int, BootstrapReport], Sequence[BootstrapReport]]) -> float
    """
    Estimate the statistical floor of detector distances.

    :param reports: Bootstrap reports of single-qubit detectors.
    :return: Median over qubits of `sqrt(sum_k std(a_k(0))**2)`.
    :raise ValidationError: No reports or a report isn't single-qubit.
    """
    values = list(reports.values()) if isinstance(reports, Mapping) else list(reports)
    if not values:
        raise ValidationError("no bootstrap reports given")
    scales = []  # type: List[float]
    for report in values:
        if report.num_qubits != 1:
            error = "fluctuation scale needs single-qubit reports, got {}".format(
                report.num_qubits
            )
            raise ValidationError(error)
        scales.append(float(np.sqrt(np.sum(report.std[0] ** 2))))
    return float(np.median(scales))


def format_table(t, digits=3, title=None):
    # type: (ComparisonTable, int, Optional[str]) -> str
    """
    Format a table as aligned plain text.

    :param t: Table.
    :param digits: Decimal places.
    :param title: Optional first line.
    :return: Text, absent entries shown as `-`.
    """
    cells = [[""] + list(t.cols)]  # type: List[List[str]]
    for r, row in enumerate(t.rows):
        cells.append(
            [row]
            + [
                "-" if np.isnan(value) else "{:.{}f}".format(value, digits)
                for value in t.distances[r]
            ]
        )
    widths = [max(len(line[c]) for line in cells) for c in range(len(cells[0]))]
    lines = []  # type: List[str]
    if title:
        lines.append(title)
    for line in cells:
        lines.append(
            "  ".join(
                cell.ljust(width) if c == 0 else cell.rjust(width)
                for c, (cell, width) in enumerate(zip(line, widths))
            ).rstrip()
        )
    lines.append("fluctuation scale {:.{}g}".format(t.fluctuation_scale, digits))
    return "\n".join(lines) + "\n"
