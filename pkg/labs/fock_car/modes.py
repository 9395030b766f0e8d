"""
Mode spaces: ordered label lists that fix the Jordan-Wigner ordering.

Labels are tuples. A chain uses ``(x,)``, a lattice patch ``(x1, x2, i)`` with
the internal index innermost, and the stacked two-layer space prefixes every
label with its layer: ``(1, *label), (2, *label)`` interleaved so that the
modes of one site stay adjacent.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from core.errors import UnknownLabel

Label = Tuple[int, ...]


@dataclass(frozen=True)
class ModeSpace:
    labels: Tuple[Label, ...]
    stacked: bool = False
    _index: Dict[Label, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(tuple(l) for l in self.labels)
        object.__setattr__(self, "labels", labels)
        index = {label: k for k, label in enumerate(labels)}
        if len(index) != len(labels):
            raise ValueError("mode labels must be unique")
        object.__setattr__(self, "_index", index)

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    @property
    def fock_dim(self) -> int:
        return 1 << self.n_modes

    def index_of(self, label: Sequence[int]) -> int:
        try:
            return self._index[tuple(label)]
        except KeyError:
            raise UnknownLabel(tuple(label)) from None

    def indices_of(self, region: Iterable[Sequence[int]]) -> List[int]:
        return [self.index_of(label) for label in region]

    def layer_labels(self, layer: int) -> List[Label]:
        if not self.stacked:
            raise UnknownLabel((layer,))
        return [l for l in self.labels if l[0] == layer]

    def layer_indices(self, layer: int) -> List[int]:
        return self.indices_of(self.layer_labels(layer))

    @classmethod
    def chain(cls, positions: Iterable[int]) -> "ModeSpace":
        return cls(tuple((int(x),) for x in positions))

    @classmethod
    def patch(cls, sites: Iterable[Tuple[int, int]], n_internal: int = 1) -> "ModeSpace":
        return cls(tuple((int(x1), int(x2), i) for (x1, x2) in sites for i in range(n_internal)))

    @classmethod
    def generic(cls, n_modes: int) -> "ModeSpace":
        return cls(tuple((k,) for k in range(n_modes)))

    def doubled(self) -> "ModeSpace":
        """Two-layer space with layers interleaved mode by mode."""
        labels = []
        for label in self.labels:
            labels.append((1,) + label)
            labels.append((2,) + label)
        return ModeSpace(tuple(labels), stacked=True)
