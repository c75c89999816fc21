"""Shared helpers: random DAG generators and fixture loading."""

from __future__ import annotations

import numpy as np
import pytest

from dswig.fixtures import load_fixture
from dswig.graph import CausalGraph, Edge, EdgeLabel, Node


def random_dag(rng: np.random.Generator, n: int = 8, p: float = 0.3) -> CausalGraph:
    """Random DAG over n nodes; edges only point from lower to higher index."""
    nodes = [Node(f"N{i}") for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append(Edge(f"N{i}", f"N{j}"))
    return CausalGraph(nodes, edges, name=f"rand{n}")


def random_labeled_swig_input(rng: np.random.Generator, n: int = 9, p: float = 0.3):
    """Random DAG with treatment roles and sprinkled separability tags,
    suitable for building SWIGs and difference nodes."""
    n_treat = int(rng.integers(1, 3))
    treat_idx = sorted(rng.choice(np.arange(1, n - 2), size=n_treat, replace=False).tolist())
    nodes = []
    for i in range(n):
        if i in treat_idx:
            nodes.append(Node(f"N{i}", role="treatment", t=treat_idx.index(i) + 1))
        elif i == 0:
            nodes.append(Node("N0", kind="exogenous", observed=False))
        else:
            nodes.append(Node(f"N{i}"))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if j in treat_idx and i in treat_idx:
                # keep treatments unordered siblings sometimes
                if rng.random() > p:
                    continue
            elif rng.random() > p:
                continue
            label = EdgeLabel.plain()
            if i == 0 and rng.random() < 0.4:
                label = EdgeLabel.alpha("a") if rng.random() < 0.5 else EdgeLabel.alpha0("a")
            edges.append(Edge(f"N{i}", f"N{j}", label))
    graph = CausalGraph(nodes, edges, name="rand_swig")
    return graph, [f"N{i}" for i in treat_idx]


def random_disjoint_sets(rng: np.random.Generator, ids: list[str]):
    """Random x, y, z triple (x and y nonempty, all disjoint)."""
    perm = list(rng.permutation(ids))
    nx = int(rng.integers(1, 3))
    ny = int(rng.integers(1, 3))
    nz = int(rng.integers(0, max(1, len(perm) - nx - ny)))
    x = perm[:nx]
    y = perm[nx : nx + ny]
    z = perm[nx + ny : nx + ny + nz]
    return x, y, z


@pytest.fixture(scope="session")
def fig2_case():
    return load_fixture("fig2_2x2")


@pytest.fixture(scope="session")
def fig8_case():
    return load_fixture("fig8_t3")
