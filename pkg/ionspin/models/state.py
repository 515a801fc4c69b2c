from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import FrozenSet, Iterable, List, Tuple

import networkx as nx
import numpy as np

# Qubit k is bit k of the basis index (qubit 0 is the least significant bit).
BIT_CONVENTION = "qubit0_lsb"


class QuantumState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    amplitudes: np.ndarray

    @model_validator(mode="after")
    def check_shape(self):
        if self.amplitudes.shape != (2 ** self.n,):
            raise ValueError(f"expected {2 ** self.n} amplitudes, got {self.amplitudes.shape}")
        return self

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class GraphSpec(BaseModel):
    """Undirected simple graph on vertices 0..n-1; edges stored as (low, high)."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    edges: FrozenSet[Tuple[int, int]] = frozenset()

    @model_validator(mode="before")
    @classmethod
    def normalise_edges(cls, data):
        if isinstance(data, dict) and "edges" in data:
            data = dict(data)
            data["edges"] = frozenset(tuple(sorted((int(a), int(b)))) for a, b in data["edges"])
        return data

    @model_validator(mode="after")
    def check_edges(self):
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{self.n - 1}")
        return self

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "GraphSpec":
        return cls(n=graph.number_of_nodes(), edges=list(graph.edges()))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "GraphSpec":
        return cls(n=n, edges=list(edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def neighbors(self, vertex: int) -> List[int]:
        return sorted(self.to_networkx().neighbors(vertex))

    def degrees(self) -> List[int]:
        graph = self.to_networkx()
        return [graph.degree(v) for v in range(self.n)]

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.edges:
            matrix[a, b] = matrix[b, a] = True
        return matrix

    def induced(self, vertices: List[int]) -> "GraphSpec":
        """Subgraph on ``vertices``, relabelled to 0..len(vertices)-1 in the given order."""
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        return GraphSpec(n=len(vertices), edges=edges)


def path_graph(n: int) -> GraphSpec:
    return GraphSpec.from_networkx(nx.path_graph(n))


def triangle_graph() -> GraphSpec:
    return GraphSpec.from_networkx(nx.complete_graph(3))


def square_graph() -> GraphSpec:
    return GraphSpec.from_networkx(nx.cycle_graph(4))


def ladder_graph(rows: int) -> GraphSpec:
    """n x 2 cluster in ion order: the chain plus third-neighbour links (i, i+3) for even i."""
    n = 2 * rows
    graph = nx.path_graph(n)
    graph.add_edges_from((i, i + 3) for i in range(0, n - 3, 2))
    return GraphSpec.from_networkx(graph)


def grid_graph(rows: int, columns: int) -> GraphSpec:
    """rows x columns cluster, vertex index = column * rows + row."""
    graph = nx.convert_node_labels_to_integers(nx.grid_2d_graph(columns, rows), ordering="sorted")
    return GraphSpec.from_networkx(graph)
