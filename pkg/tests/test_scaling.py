"""Cross-tree scaling: gain oracle, fixed-point map, multiplier LP, assembly.

The pipeline under test turns a Pareto-optimal allocation into anonymous
prices and budgets that support it; every stage is exercised both on
hand-sized fixtures and on generated instances.
"""

import random

import pytest

from ceub.errors import InfeasibleLP, NotParetoOptimal, SameTree
from ceub.generators import GenConfig, gen_instance, gen_pareto_allocation
from ceub.graphs import build_graph, find_cycle
from ceub.market import (
    bundle_cost,
    is_in_demand_set,
    make_allocation,
    validate_instance,
    verify_equilibrium,
)
from ceub.rationals import ZERO, rat
from ceub.scaling import (
    assemble_equilibrium,
    build_gain_state,
    build_gain_table,
    fixed_point_map,
    gain_ij,
    solve_multiplier_lp,
    support_pipeline,
    support_with_details,
)

HALF = rat(1, 2)


def diagonal(values):
    inst = validate_instance(values)
    alloc = make_allocation([[1, 0], [0, 1]])
    return inst, alloc


def toy_state():
    inst = validate_instance([[1], [99]])
    alloc = make_allocation([[rat(99, 100)], [rat(1, 100)]])
    return build_gain_state(inst, alloc)


# ------------------------------------------------------------- gain oracle


def test_gain_cases_on_mismatched_diagonal():
    # own item worth 1, the other worth 3: every cross gain hits the cap
    inst, alloc = diagonal([[1, 3], [3, 1]])
    state = build_gain_state(inst, alloc)
    assert state.v_min == HALF

    # scaled price below scaled budget: the whole item is affordable
    assert gain_ij(state, (1, 0), 0, 1) == HALF
    # zero multiplier on the agent's own tree kills her budget
    assert gain_ij(state, (0, 1), 0, 1) == 0
    # equal multipliers: partial purchase, raw gain 2 capped to 1/2
    assert gain_ij(state, (HALF, HALF), 0, 1) == HALF


def test_gain_requires_cross_tree_pairs():
    state = toy_state()
    with pytest.raises(SameTree):
        gain_ij(state, (rat(1),), 0, 0)


def test_gain_undefined_for_unfunded_agents():
    inst = validate_instance([[1, 1], [1, 1]])
    alloc = make_allocation([[1, 1], [0, 0]])
    state = build_gain_state(inst, alloc)
    with pytest.raises(ValueError):
        gain_ij(state, (1, 0), 1, 0)


def test_gain_table_shape_and_caps():
    inst, alloc = diagonal([[1, 3], [3, 1]])
    state = build_gain_state(inst, alloc)
    table = build_gain_table(state, (HALF, HALF))
    assert table.gain_ij[0][0] == 0  # same tree
    assert table.gain_ij[0][1] == HALF
    assert table.gain_j == (HALF, HALF)
    assert table.gain_T == (HALF, HALF)
    assert not table.all_zero
    for row in table.gain_ij:
        for g in row:
            assert 0 <= g <= state.v_min


# --------------------------------------------------------- fixed-point map


def test_fixed_point_map_stays_on_simplex():
    rng = random.Random(11)
    for seed in range(20):
        cfg = GenConfig(seed=seed, agents=rng.randrange(2, 6), items=rng.randrange(2, 6))
        inst = gen_instance(cfg)
        y = gen_pareto_allocation(inst, seed)
        details = support_with_details(inst, y)
        state = details.state
        count = state.decomp.tree_count
        funded = [t for t in range(count) if not state.decomp.is_degenerate(t)]
        ticks = [rng.randrange(0, 5) for _ in funded]
        total = sum(ticks) or 1
        alpha = [ZERO] * count
        for t, w in zip(funded, ticks):
            alpha[t] = rat(w, total)
        if sum(alpha, ZERO) != 1:
            alpha[funded[0]] += 1 - sum(alpha, ZERO)
        image = fixed_point_map(state, tuple(alpha))
        assert sum(image, ZERO) == 1
        assert all(a >= 0 for a in image)
        for t in range(count):
            if state.decomp.is_degenerate(t):
                assert image[t] == 0


def test_fixed_point_with_nonzero_gains():
    # the unsupportable diagonal still fixes (1/2, 1/2): both trees gain
    # the same capped amount, so the normalization cancels
    inst, alloc = diagonal([[1, 3], [3, 1]])
    state = build_gain_state(inst, alloc)
    assert fixed_point_map(state, (HALF, HALF)) == (HALF, HALF)
    assert not build_gain_table(state, (HALF, HALF)).all_zero


def test_alpha_validation():
    inst, alloc = diagonal([[3, 1], [1, 3]])
    state = build_gain_state(inst, alloc)
    with pytest.raises(ValueError):
        fixed_point_map(state, (rat(1),))
    with pytest.raises(ValueError):
        fixed_point_map(state, (rat(2), rat(-1)))
    with pytest.raises(ValueError):
        fixed_point_map(state, (HALF, rat(1, 3)))

    lopsided = build_gain_state(
        validate_instance([[1, 1], [1, 1]]), make_allocation([[1, 1], [0, 0]])
    )
    with pytest.raises(ValueError):
        fixed_point_map(lopsided, (HALF, HALF))  # tree 1 is degenerate


# ------------------------------------------------------------ multiplier LP


def test_single_tree_is_trivially_scaled():
    alpha, lam = solve_multiplier_lp(toy_state())
    assert alpha == (rat(1),)
    assert lam == 1


def test_matched_diagonal_splits_evenly():
    inst, alloc = diagonal([[3, 1], [1, 3]])
    state = build_gain_state(inst, alloc)
    alpha, lam = solve_multiplier_lp(state)
    assert alpha == (HALF, HALF)
    assert lam == HALF
    table = build_gain_table(state, alpha)
    assert table.all_zero
    assert fixed_point_map(state, alpha) == alpha


def test_mismatched_diagonal_is_infeasible():
    inst, alloc = diagonal([[1, 3], [3, 1]])
    state = build_gain_state(inst, alloc)
    with pytest.raises(InfeasibleLP):
        solve_multiplier_lp(state)


def test_infeasible_lp_signals_not_pareto_optimal():
    assert issubclass(InfeasibleLP, NotParetoOptimal)


def test_identical_trees_split_evenly():
    inst, alloc = diagonal([[1, 1], [1, 1]])
    state = build_gain_state(inst, alloc)
    alpha, lam = solve_multiplier_lp(state)
    assert alpha == (HALF, HALF)
    assert lam == HALF


def test_degenerate_trees_are_pinned_at_zero():
    inst = validate_instance([[1, 1], [1, 1]])
    alloc = make_allocation([[1, 1], [0, 0]])
    state = build_gain_state(inst, alloc)
    alpha, lam = solve_multiplier_lp(state)
    assert alpha == (rat(1), ZERO)
    assert lam == 1


# ---------------------------------------------------------------- assembly


def test_assemble_toy_equilibrium():
    state = toy_state()
    alpha, _ = solve_multiplier_lp(state)
    eq = assemble_equilibrium(state, alpha)
    assert eq.prices == (rat(1),)
    assert eq.budgets == (rat(99, 100), rat(1, 100))
    assert eq.alpha == (rat(1),)
    report = verify_equilibrium(state.inst, state.alloc, eq.prices, eq.budgets)
    assert report.supported and report.items_fully_allocated and report.budgets_exhausted


def test_assemble_scales_prices_and_budgets():
    inst, alloc = diagonal([[3, 1], [1, 3]])
    state = build_gain_state(inst, alloc)
    alpha, _ = solve_multiplier_lp(state)
    eq = assemble_equilibrium(state, alpha)
    assert eq.prices == (rat(3, 2), rat(3, 2))
    assert eq.budgets == (rat(3, 2), rat(3, 2))


# ----------------------------------------------------------- full pipeline


def test_support_pipeline_toy():
    inst = validate_instance([[1], [99]])
    y = make_allocation([[rat(99, 100)], [rat(1, 100)]])
    eq = support_pipeline(inst, y)
    assert eq.prices == (rat(1),)
    assert eq.budgets == (rat(99, 100), rat(1, 100))


def test_support_pipeline_supports_original_and_transform():
    # equal valuations, everything shared: the cycle-free transform is a
    # permutation, and the prices support both matrices
    inst = validate_instance([[1, 1], [1, 1]])
    y = make_allocation([[HALF, HALF], [HALF, HALF]])
    details = support_with_details(inst, y)
    eq = details.equilibrium
    assert find_cycle(build_graph(inst, eq.allocation)) is None
    for alloc in (y, eq.allocation):
        report = verify_equilibrium(inst, alloc, eq.prices, eq.budgets)
        assert report.supported
        assert report.budgets_exhausted
    for i in range(2):
        assert bundle_cost(y.x[i], eq.prices) == eq.budgets[i]


def test_support_pipeline_rejects_dominated_input():
    inst = validate_instance([[2, 1], [1, 2]])
    y = make_allocation([[HALF, HALF], [HALF, HALF]])
    with pytest.raises(NotParetoOptimal) as info:
        support_pipeline(inst, y)
    verdict = info.value.verdict
    assert verdict is not None
    assert verdict.certificate.improvement_ratio == 4


def test_support_pipeline_rejects_partial_allocation():
    inst = validate_instance([[1], [99]])
    y = make_allocation([[HALF], [rat(1, 4)]])
    with pytest.raises(NotParetoOptimal) as info:
        support_pipeline(inst, y)
    assert info.value.verdict.unallocated_item == 0


def test_pipeline_details_expose_consistent_intermediates():
    rng = random.Random(5)
    for seed in range(25):
        cfg = GenConfig(seed=seed, agents=rng.randrange(2, 7), items=rng.randrange(2, 7))
        inst = gen_instance(cfg)
        y = gen_pareto_allocation(inst, seed, mode="a" if seed % 2 else "b")
        details = support_with_details(inst, y)
        eq = details.equilibrium
        state = details.state

        assert details.lam > 0
        assert sum(details.alpha, ZERO) == 1
        assert details.alpha == eq.alpha
        assert build_gain_table(state, details.alpha).all_zero
        assert fixed_point_map(state, details.alpha) == details.alpha
        assert find_cycle(build_graph(inst, details.cycle_free)) is None

        n = inst.agent_count
        for i in range(n):
            assert bundle_cost(y.x[i], eq.prices) == eq.budgets[i]
            report = is_in_demand_set(inst, eq.prices, eq.budgets[i], i, y.x[i])
            assert report.in_demand_set
        full = verify_equilibrium(inst, eq.allocation, eq.prices, eq.budgets)
        assert full.supported and full.items_fully_allocated and full.budgets_exhausted
