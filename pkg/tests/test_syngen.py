import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairgraph import rng as rngmod
from fairgraph._pairs import PairSpace, rank_triangle, unrank_triangle
from fairgraph.graphdata import EdgeType, GroupId, compute_stats, save_bundle
from fairgraph.syngen import (SynConfig, expected_edge_counts, generate, preset,
                              sample_edges, sample_features, sample_groups,
                              stratified_split)

PINNED = (1218, 1244, 1239, 1299)


def groups_from_sizes(sizes):
    g = np.repeat(np.arange(4), sizes)
    return g & 1, g >> 1


def small_cfg(**kw):
    base = dict(n=12, d1=2, group_probs=(0.25,) * 4, mu_y=1.0, mu_s=1.0, c1=1.0, c2=1.0,
                edge_probs={t: 0.3 for t in EdgeType})
    base.update(kw)
    return SynConfig(**base)


# -- configuration ---------------------------------------------------------

def test_presets_match_reference_tables():
    s1, s2 = preset("syn1"), preset("Syn-2")
    assert {t.name: p for t, p in s1.edge_probs.items()} == {
        "E1": .008, "E2": .004, "E3": .004, "E4": .006, "E5": .002,
        "E6": .002, "E7": .002, "E8": .002, "E9": .001, "E10": .002}
    assert {t.name: p for t, p in s2.edge_probs.items()} == {
        "E1": .006, "E2": .008, "E3": .007, "E4": .005, "E5": .002,
        "E6": .002, "E7": .003, "E8": .004, "E9": .002, "E10": .002}
    assert s1.group_probs == (0.25,) * 4
    assert s2.group_probs == (0.22, 0.28, 0.28, 0.22)
    assert s1.n == s2.n == 5000 and s1.d == s2.d == 48


@pytest.mark.parametrize("bad", [
    dict(group_probs=(0.5, 0.5, 0.5, 0.0)),
    dict(group_probs=(1.2, -0.2, 0, 0)),
    dict(c1=0.0),
    dict(c2=-1.0),
    dict(n=0),
    dict(edge_probs={"E3": 1.5}),
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        small_cfg(**bad)


def test_config_json_round_trip(tmp_path):
    cfg = preset("syn2", seed=5)
    assert SynConfig.from_json(cfg.to_json()) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert SynConfig.load(path) == cfg
    assert '"E10"' in cfg.to_json()


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("syn3")


# -- groups and features ---------------------------------------------------

def test_degenerate_group_probs():
    y, s = sample_groups(small_cfg(n=50, group_probs=(1, 0, 0, 0)), np.random.default_rng(0))
    assert not y.any() and not s.any()


@pytest.mark.parametrize("seed", range(5))
def test_syn1_group_sizes_concentrate(seed):
    y, s = sample_groups(preset("syn1", seed), rngmod.stream(seed, rngmod.GROUPS))
    sizes = np.bincount(2 * s + y, minlength=4)
    sigma = math.sqrt(5000 * 0.25 * 0.75)
    assert np.all(np.abs(sizes - 1250) <= 3 * sigma)


def test_syn2_reference_group_sizes_are_plausible():
    # expected sizes (1100, 1400, 1400, 1100); reference realization within 3 sigma
    probs = np.array(preset("syn2").group_probs)
    expected = 5000 * probs
    assert np.allclose(expected, [1100, 1400, 1400, 1100])
    sigma = np.sqrt(5000 * probs * (1 - probs))
    assert np.all(np.abs(np.array([1078, 1384, 1408, 1130]) - expected) <= 3 * sigma)


def test_features_zero_variance_limit():
    cfg = small_cfg(n=4, d1=3, mu_y=(0.5, 1.0, 2.0), mu_s=(3.0, 4.0, 5.0), c1=1e-300, c2=1e-300)
    x = sample_features(cfg, np.array([1, 0, 1, 0]), np.array([0, 0, 1, 1]),
                        np.random.default_rng(0))
    assert x.shape == (4, 6)
    assert x[0].tolist() == [0.5, 1.0, 2.0, -3.0, -4.0, -5.0]
    assert x[3].tolist() == [-0.5, -1.0, -2.0, 3.0, 4.0, 5.0]


def test_features_moments_concentrate():
    cfg = preset("syn1")
    y, s = sample_groups(cfg, np.random.default_rng(1))
    x = sample_features(cfg, y, s, np.random.default_rng(2))
    ey = x[y == 1, :cfg.d1]
    m = len(ey)
    c1 = cfg.c1
    assert np.all(np.abs(ey.mean(0) - np.asarray(cfg.mu_y)) <= 4 * math.sqrt(c1 / m))
    assert np.all(np.abs(ey.var(0, ddof=1) - c1) <= 5 * c1 * math.sqrt(2 / m))
    es = x[s == 0, cfg.d1:]
    assert np.all(np.abs(es.mean(0) + np.asarray(cfg.mu_s)) <= 4 * math.sqrt(cfg.c2 / len(es)))


# -- pair ranking ----------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(2, 300), st.data())
def test_triangle_rank_bijection(m, data):
    k = np.array(data.draw(st.lists(st.integers(0, m * (m - 1) // 2 - 1), min_size=1, max_size=20)))
    i, j = unrank_triangle(k, m)
    assert np.all((0 <= i) & (i < j) & (j < m))
    assert np.array_equal(rank_triangle(i, j, m), k)


def test_triangle_unrank_large_m_exact():
    m = 3_000_000
    k = np.array([0, 1, m - 2, m - 1, m * (m - 1) // 2 - 1, 2_345_678_901_234])
    i, j = unrank_triangle(k, m)
    assert np.array_equal(rank_triangle(i, j, m), k)


@pytest.mark.parametrize("t", list(EdgeType))
def test_pair_space_enumerates_exactly_the_type(t):
    groups = np.random.default_rng(int(t)).integers(0, 4, size=23)
    space = PairSpace(groups, t)
    pairs = space.unrank(np.arange(space.size))
    brute = {(u, v) for u in range(23) for v in range(u + 1, 23)
             if {groups[u], groups[v]} == set(t.groups)}
    assert {tuple(p) for p in pairs.tolist()} == brute
    assert len(pairs) == len(brute)
    assert np.array_equal(space.rank(pairs[:, ::-1]), np.arange(space.size))


# -- edges -----------------------------------------------------------------

@pytest.mark.parametrize("method", ["binomial", "pairwise"])
def test_edges_deterministic_limits(method):
    y, s = groups_from_sizes((1, 1, 1, 1))
    none = sample_edges(small_cfg(n=4, edge_probs={}), y, s, np.random.default_rng(0), method)
    full = sample_edges(small_cfg(n=4, edge_probs={t: 1.0 for t in EdgeType}), y, s,
                        np.random.default_rng(0), method)
    assert none.shape == (0, 2)
    assert sorted(map(tuple, full.tolist())) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_binomial_and_pairwise_agree_in_distribution():
    # per-pair inclusion frequencies of both samplers match the type probability
    y, s = groups_from_sizes((3, 4, 2, 3))
    probs = {t: p for t, p in zip(EdgeType, (.1, .5, .9, .3, .2, .7, .4, .6, .05, .8))}
    cfg = small_cfg(edge_probs=probs)
    groups = 2 * s + y
    n, reps = len(y), 3000
    target = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            t = next(t for t in EdgeType if {groups[u], groups[v]} == set(t.groups))
            target[u, v] = probs[t]
    iu = np.triu_indices(n, 1)
    p = target[iu]
    tol = 5 * np.sqrt(p * (1 - p) / reps)
    for method in ("binomial", "pairwise"):
        rng = np.random.default_rng(11)
        freq = np.zeros((n, n))
        for _ in range(reps):
            e = sample_edges(cfg, y, s, rng, method)
            freq[e[:, 0], e[:, 1]] += 1
        assert np.all(np.abs(freq[iu] / reps - p) <= tol), method


def test_expected_edge_counts_examples():
    exp = expected_edge_counts(preset("syn1"), PINNED)
    assert exp[EdgeType.E1] == pytest.approx(5929.224, abs=1e-9)
    assert math.comb(1218, 2) == 741_153
    assert exp[EdgeType.E9] == pytest.approx(1244 * 1239 * 0.001, abs=1e-9)
    assert round(exp[EdgeType.E9], 1) == 1541.3
    zero = expected_edge_counts(small_cfg(edge_probs={}), PINNED)
    assert all(v == 0 for v in zero.values())


def test_expected_edge_counts_brute_force():
    sizes = (5, 3, 0, 7)
    cfg = small_cfg(edge_probs={t: 0.1 * int(t) / 2 for t in EdgeType})
    g = np.repeat(np.arange(4), sizes)
    brute = {t: 0.0 for t in EdgeType}
    for u in range(len(g)):
        for v in range(u + 1, len(g)):
            t = next(t for t in EdgeType if {g[u], g[v]} == set(t.groups))
            brute[t] += cfg.edge_probs[t]
    exp = expected_edge_counts(cfg, {GroupId(i): m for i, m in enumerate(sizes)})
    assert exp == pytest.approx(brute)


def test_syn1_pinned_total_within_3_sigma():
    exp = expected_edge_counts(preset("syn1"), PINNED)
    total = sum(exp.values())
    assert total == pytest.approx(34352.98, abs=0.01)
    y, s = groups_from_sizes(PINNED)
    e = sample_edges(preset("syn1"), y, s, np.random.default_rng(123))
    assert abs(len(e) - total) <= 3 * math.sqrt(total)
    assert abs(34363 - total) <= 3 * math.sqrt(total)


@pytest.mark.parametrize("seed", range(4))
def test_per_type_counts_within_4_sigma(seed):
    cfg = preset("syn1", seed)
    g = generate(cfg)
    st_ = compute_stats(g)
    sizes = [st_.group_sizes[k] for k in GroupId]
    exp = expected_edge_counts(cfg, sizes)
    for t in EdgeType:
        a, b = t.groups
        pairs = math.comb(sizes[a], 2) if a == b else sizes[a] * sizes[b]
        p = cfg.edge_probs[t]
        assert abs(st_.edge_type_counts[t] - exp[t]) <= 4 * math.sqrt(pairs * p * (1 - p)), t


# -- full pipeline ---------------------------------------------------------

def test_generate_deterministic_bytes(tmp_path):
    cfg = preset("syn1", seed=3).replace(n=400)
    save_bundle(generate(cfg), tmp_path / "a")
    save_bundle(generate(cfg), tmp_path / "b")
    for f in ("meta.json", "nodes.csv", "features.csv", "edges.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    other = generate(cfg.replace(seed=4))
    assert not other.same_as(generate(cfg))


def test_generate_shapes_and_meta():
    cfg = preset("syn2", seed=2)
    g = generate(cfg)
    assert g.features.shape == (5000, 48)
    assert g.name == "syn2"
    assert g.meta["seed"] == 2
    assert SynConfig.from_dict(g.meta["generator"]) == cfg
    assert not (g.train & g.val).any() and (g.train | g.val | g.test).all()


def test_syn1_homophilous_bucket_ratio():
    st_ = compute_stats(generate(preset("syn1")))
    ratio = st_.bucket(EdgeType.E1, EdgeType.E2, EdgeType.E3, EdgeType.E4) / st_.num_edges
    # expectation 17,148 / 34,352; 4 sigma of the ratio is about 0.011
    assert abs(ratio - 17148 / 34352) < 0.011


def test_syn2_average_degree():
    cfg = preset("syn2")
    # at the reference group sizes the expectation is 44,599.6 edges (degree 17.84)
    reference = sum(expected_edge_counts(cfg, [1078, 1384, 1408, 1130]).values())
    assert reference == pytest.approx(44599.6, abs=0.1)
    exp = sum(expected_edge_counts(cfg, [1100, 1400, 1400, 1100]).values())
    st_ = compute_stats(generate(cfg))
    # group sizes vary too; allow 4 sigma of the edge count plus size jitter
    assert abs(st_.average_degree - 2 * exp / 5000) < 0.35


def test_stratified_split_fractions():
    y, s = groups_from_sizes((100, 41, 7, 60))
    tr, va, te = stratified_split(y, s, np.random.default_rng(0))
    g = 2 * s + y
    for k, m in enumerate((100, 41, 7, 60)):
        assert tr[g == k].sum() == m // 2
        assert va[g == k].sum() == m // 4
        assert te[g == k].sum() == m - m // 2 - m // 4
