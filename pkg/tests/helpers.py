from ucheck.graph import Dag, random_assumption_dag
from ucheck.stats import Dataset, RngStream


def random_dag(rng: RngStream, n_nodes: int, edge_prob: float, with_selection=False) -> Dag:
    """Unconstrained random DAG over V0..V{n-1} in a random order."""
    names = [f"V{i}" for i in range(n_nodes)]
    order = [names[i] for i in rng.permutation(n_nodes)]
    edges = [
        (order[i], order[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if rng.random() < edge_prob
    ]
    selection = order[int(rng.random() * n_nodes)] if with_selection else None
    return Dag(names, edges, frozenset(), selection)


def random_query(rng: RngStream, dag: Dag):
    """Disjoint single-node endpoints plus a random conditioning set."""
    free = [v for v in sorted(dag.nodes) if v != dag.selection]
    perm = [free[i] for i in rng.permutation(len(free))]
    a, b = perm[0], perm[1]
    z = {v for v in perm[2:] if rng.random() < 0.35}
    return {a}, {b}, z


def oracle_instances(seed, count, max_nodes=10, edge_prob=0.3):
    """Assumption-respecting instances with at most ``max_nodes`` nodes."""
    for i in range(count):
        rng = RngStream(seed, i)
        with_sel = rng.random() < 0.25
        budget = max_nodes - 2 - with_sel
        n_cov = 1 + int(rng.random() * min(5, budget))
        n_lat = int(rng.random() * (budget - n_cov + 1))
        yield random_assumption_dag(rng, n_cov, n_lat, edge_prob, with_selection=with_sel)


def simulate_linear_gaussian(dag: Dag, coefficients: dict, n: int, rng: RngStream,
                             noise_sd: float = 1.0) -> Dataset:
    """Each node = sum of coefficient * parent + N(0, noise_sd^2)."""
    values = {}
    for v in dag.topological_order:
        col = rng.normal(0.0, noise_sd, n)
        for p in sorted(dag.parents(v)):
            col = col + coefficients[(p, v)] * values[p]
        values[v] = col
    return Dataset(values)


def random_coefficients(dag: Dag, rng: RngStream, low=0.3, high=0.8) -> dict:
    out = {}
    for e in sorted(dag.edges):
        sign = 1.0 if rng.random() < 0.5 else -1.0
        out[e] = sign * rng.uniform(low, high)
    return out


def scenario_data(rng: RngStream, n: int, with_u: bool, confounders: bool):
    """Three covariates into X (instruments, or confounders that also hit Y),
    with an optional unmeasured confounder; X has no effect on Y."""
    z = rng.standard_normal((n, 3))
    u = rng.standard_normal(n)
    x = z @ [0.4, 0.3, 0.3] + (0.5 * u if with_u else 0) + rng.standard_normal(n)
    y = (z @ [0.3, -0.3, 0.3] if confounders else 0) + (0.5 * u if with_u else 0) + rng.standard_normal(n)
    return Dataset({"z1": z[:, 0], "z2": z[:, 1], "z3": z[:, 2], "x": x, "y": y})



def loose_instances(seed, count, edge_prob=0.35):
    """Random orders over X, Y, C1..C3, U1, U2 where Y may have children.

    X only sends an edge to Y; instances failing the assumption checks are
    skipped, so the yield count is below ``count``.
    """
    from ucheck.graph import check_assumptions

    names = ["X", "Y", "C1", "C2", "C3", "U1", "U2"]
    covs = ["C1", "C2", "C3"]
    for i in range(count):
        rng = RngStream(seed, i)
        order = [names[j] for j in rng.permutation(len(names))]
        edges = []
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                u, v = order[a], order[b]
                if u == "X":
                    if v == "Y" and rng.random() < 0.5:
                        edges.append((u, v))
                elif rng.random() < edge_prob:
                    edges.append((u, v))
        dag = Dag(order, edges, frozenset({"U1", "U2"}))
        if not check_assumptions(dag, "X", "Y", covs):
            yield dag, "X", "Y", covs
