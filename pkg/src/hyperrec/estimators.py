"""Turn posterior samples into marginals, entropies, and summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .model import Hypergraph, Key

__all__ = [
    "MarginalTable",
    "entropy",
    "classify_uncertain",
    "UncertaintyPartition",
    "summary_stats",
    "SummaryStats",
    "compression",
    "write_marginals_csv",
]


class MarginalTable:
    """Per-node-set presence counts over posterior samples.

    A node set is "present" in a sample when it carries at least one
    hyperedge; multiplicities collapse to presence. Storage is sparse: keys
    never seen in any sample have probability 0 and are not stored (typical
    posteriors leave almost all candidate sets at exactly zero).

    Tables accumulated independently can be merged; merging sums counts and
    totals, so it is commutative and associative.
    """

    __slots__ = ("counts", "total_samples")

    def __init__(self):
        self.counts: dict[Key, int] = {}
        self.total_samples = 0

    @classmethod
    def from_counts(cls, counts: dict[Key, int], total_samples: int) -> "MarginalTable":
        t = cls()
        for key, c in counts.items():
            if not 0 <= c <= total_samples:
                raise ValueError(f"count {c} for {key} outside [0, {total_samples}]")
            if c:
                t.counts[tuple(key)] = c
        t.total_samples = total_samples
        return t

    def accumulate(self, sample: Hypergraph) -> None:
        """Count one sample: every distinct key present gets +1."""
        self.accumulate_keys(sample.edges.keys())

    def accumulate_keys(self, keys) -> None:
        for key in keys:
            self.counts[key] = self.counts.get(key, 0) + 1
        self.total_samples += 1

    def merge(self, other: "MarginalTable") -> "MarginalTable":
        out = MarginalTable()
        out.counts = dict(self.counts)
        for key, c in other.counts.items():
            out.counts[key] = out.counts.get(key, 0) + c
        out.total_samples = self.total_samples + other.total_samples
        return out

    def presence_probability(self, key) -> float:
        if self.total_samples < 1:
            raise ValueError("empty marginal table")
        return self.counts.get(tuple(sorted(key)), 0) / self.total_samples

    def items(self):
        """(key, probability) pairs for every key seen at least once."""
        n = self.total_samples
        for key, c in self.counts.items():
            yield key, c / n

    def __len__(self):
        return len(self.counts)


def entropy(p: float) -> float:
    """Binary entropy of a presence probability, in bits; 0 at p in {0, 1}."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    q = 1.0 - p
    return -p * math.log2(p) - q * math.log2(q)


@dataclass
class UncertaintyPartition:
    """Exhaustive, disjoint split of the observed keys at threshold alpha."""

    alpha: float
    uncertain_by_size: dict[int, list[Key]] = field(default_factory=dict)
    certain_present: list[Key] = field(default_factory=list)
    certain_absent: list[Key] = field(default_factory=list)

    def uncertain_count(self, size: int | None = None) -> int:
        if size is None:
            return sum(len(v) for v in self.uncertain_by_size.values())
        return len(self.uncertain_by_size.get(size, []))

    def uncertain_higher_count(self, above_size: int = 3) -> int:
        return sum(
            len(v) for k, v in self.uncertain_by_size.items() if k > above_size
        )


def classify_uncertain(table: MarginalTable, alpha: float = 0.05) -> UncertaintyPartition:
    """Label keys uncertain when presence probability lies in [alpha, 1-alpha],
    certain-present above, certain-absent below. Uncertain keys are grouped
    by size (edges, triangles, larger)."""
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha {alpha} outside (0, 0.5]")
    part = UncertaintyPartition(alpha=alpha)
    for key, p in table.items():
        if p > 1.0 - alpha:
            part.certain_present.append(key)
        elif p < alpha:
            part.certain_absent.append(key)
        else:
            part.uncertain_by_size.setdefault(len(key), []).append(key)
    part.certain_present.sort()
    part.certain_absent.sort()
    for v in part.uncertain_by_size.values():
        v.sort()
    return part


@dataclass(frozen=True)
class SummaryStats:
    size_histogram: dict[int, int]
    mean_size: float | None
    total_hyperedges: int


def summary_stats(h: Hypergraph) -> SummaryStats:
    """Hyperedge size histogram (with multiplicity) and the mean size."""
    hist = h.size_counts()
    total = sum(hist.values())
    if total == 0:
        return SummaryStats({}, None, 0)
    mean = sum(k * e for k, e in hist.items()) / total
    return SummaryStats(hist, mean, total)


def compression(sigma_baseline: float, sigma_best: float) -> float:
    """Bits saved relative to the baseline description. The baseline is the
    sampler's starting point, so a negative saving indicates a sampler bug."""
    saving = sigma_baseline - sigma_best
    if saving < 0:
        raise ValueError(
            f"best description ({sigma_best}) exceeds baseline "
            f"({sigma_baseline}); the optimizer should never lose ground"
        )
    return saving


def write_marginals_csv(table: MarginalTable, labels: list[str] | None,
                        alpha: float, fh) -> None:
    """CSV columns: size, nodes (semicolon-joined labels), probability,
    entropy, classification; sorted by descending entropy then key."""
    part = classify_uncertain(table, alpha)
    cls_of: dict[Key, str] = {}
    for key in part.certain_present:
        cls_of[key] = "certain-present"
    for key in part.certain_absent:
        cls_of[key] = "certain-absent"
    for keys in part.uncertain_by_size.values():
        for key in keys:
            cls_of[key] = "uncertain"

    def label_key(key: Key) -> tuple[str, ...]:
        if labels is None:
            return tuple(sorted(str(i) for i in key))
        return tuple(sorted(labels[i] for i in key))

    rows = []
    for key, p in table.items():
        rows.append((entropy(p), label_key(key), len(key), p, cls_of[key]))
    rows.sort(key=lambda r: (-r[0], r[2], r[1]))
    w = csv.writer(fh)
    w.writerow(["size", "nodes", "probability", "entropy", "classification"])
    for s, lab, size, p, cls in rows:
        w.writerow([size, ";".join(lab), f"{p:.10g}", f"{s:.10g}", cls])
