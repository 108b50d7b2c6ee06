"""End-to-end acceptance checks, one per criterion.

Each check prints a single ``PASS``/``FAIL`` line with its measured figures
and then asserts. Run directly (``python3 tests/test_acceptance.py``) for
just the summary lines.
"""

import time
from itertools import product

import numpy as np
import pytest

from provnmf.approx import approx_nmf, w0_diagnostics
from provnmf.exact import (Status, build_proper_chain, solve_general_nmf, solve_sf,
                           verify_factorization)
from provnmf.instances import (build_gadget_2d, build_intermediate_simplex, gen_noisy_product,
                               gen_planted_product, gen_separable, verify_completeness)
from provnmf.partitions import brute_force_partitions, enumerate_hyperplane_partitions
from provnmf.robust import derive_params, solve_separable_robust
from provnmf.separable import find_loners, solve_separable

pytestmark = pytest.mark.slow


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    return line


def _emit(capsys, number, ok, detail):
    if capsys is None:
        report(number, ok, detail)
    else:
        with capsys.disabled():
            print()
            report(number, ok, detail)
    return ok


def matches_up_to_permutation(found, truth, tol):
    if found.shape != truth.shape:
        return False
    used = set()
    for row in truth:
        err = np.abs(found - row).max(axis=1)
        j = next((j for j in np.argsort(err) if j not in used), None)
        if j is None or err[j] > tol:
            return False
        used.add(j)
    return True


def criterion_1(capsys=None):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    failures = 0
    for i in range(100):
        r = int(rng.integers(2, 11))
        n = int(rng.integers(r, 201))
        m = int(rng.integers(max(r, 5), 101))
        inst = gen_separable(n, m, r, alpha_min=0.05, seed=1000 + i)
        res = solve_separable(inst.m, r)
        f = res.factorization
        ok = (matches_up_to_permutation(res.w, inst.w_true, 1e-7)
              and f.residual_fro <= 1e-7 * np.linalg.norm(inst.m))
        failures += not ok
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed <= 60
    return _emit(capsys, 1, ok, f"{100 - failures}/100 recovered, {elapsed:.1f}s of 60s")


def criterion_2(capsys=None):
    failures, worst = 0, 0.0
    for i in range(50):
        r = 2 + i % 4
        alpha = 0.4
        eps = 0.9 * alpha / (20 / alpha + 13)
        inst = gen_separable(30, 12, r, alpha_min=alpha, noise_eps=eps, seed=2000 + i)
        p = derive_params(eps, alpha)
        assert p.feasible
        res = solve_separable_robust(inst.m, p, expected_r=r)
        f = res.factorization
        row_l1 = np.abs(inst.m - f.a @ f.w).sum(axis=1).max()
        worst = max(worst, row_l1 / p.residual_bound)
        failures += not (res.found_r == r and row_l1 <= p.residual_bound)
    return _emit(capsys, 2, failures == 0,
                 f"{50 - failures}/50 within bound, worst residual/bound {worst:.3f}")


def criterion_3(capsys=None):
    rng = np.random.default_rng(3)
    mismatches = 0
    count = 0
    for i in range(40):
        r = int(rng.integers(2, 5))
        n = int(rng.integers(r, 9))
        inst = gen_separable(n, 6, r, alpha_min=0.2, seed=3000 + i)
        m = inst.m
        if i % 2:
            m = np.vstack([m, m[inst.anchor_rows[0]]])
        dist = np.abs(m[:, None, :] - inst.w_true[None]).sum(axis=2).min(axis=1)
        expected = set(np.flatnonzero(dist <= 1e-12).tolist())
        mismatches += set(find_loners(m)) != expected
        count += 1
    return _emit(capsys, 3, mismatches == 0, f"{count - mismatches}/{count} exact agreement")


def criterion_4(capsys=None):
    rng = np.random.default_rng(4)
    mismatches = 0
    for i in range(30):
        cols = int(rng.integers(3, 9))
        rank = int(rng.integers(1, 4))
        m = rng.normal(size=(4, rank)) @ rng.normal(size=(rank, cols))
        if i % 3 == 0:
            m[:, 0] = 0.0
        fast = {tuple(v) for v in enumerate_hyperplane_partitions(m, rank)}
        slow = {tuple(v) for v in brute_force_partitions(m)}
        mismatches += fast != slow
    return _emit(capsys, 4, mismatches == 0, f"{30 - mismatches}/30 exact set equality")


def criterion_5(capsys=None):
    rng = np.random.default_rng(5)
    successes = false_accepts = 0
    for i in range(50):
        r = int(rng.integers(1, 5))
        n, m = int(rng.integers(r, 12)), int(rng.integers(r, 12))
        _, _, mat = gen_planted_product(n, m, r, seed=5000 + i)
        res = solve_sf(mat, r, seed=i)
        if res.status is Status.SUCCESS:
            if verify_factorization(mat, res.factorization, 1e-7).ok:
                successes += 1
            else:
                false_accepts += 1
    ok = successes >= 48 and false_accepts == 0
    return _emit(capsys, 5, ok, f"{successes}/50 verified, {false_accepts} false accepts")


def criterion_6(capsys=None):
    rng = np.random.default_rng(6)
    infeasible = 0
    for i in range(20):
        rank = int(rng.integers(2, 5))
        _, _, mat = gen_planted_product(7, 8, rank, seed=6000 + i)
        res = solve_general_nmf(mat, rank - 1)
        infeasible += res.status is Status.PROVABLY_INFEASIBLE and res.factorization is None
    solved = false_accepts = 0
    for i in range(20):
        rank = 1 + i % 3
        _, _, mat = gen_planted_product(7, 8, 3, seed=6100 + i, rank=rank)
        res = solve_general_nmf(mat, 3, seed=i)
        if res.ok:
            if verify_factorization(mat, res.factorization, 1e-7).ok:
                solved += 1
            else:
                false_accepts += 1
    ok = infeasible == 20 and solved == 20 and false_accepts == 0
    return _emit(capsys, 6, ok, f"{infeasible}/20 provably infeasible, {solved}/20 planted "
                 f"solved, {false_accepts} false accepts")


def criterion_7(capsys=None):
    start = time.perf_counter()
    failures, worst = 0, 0.0
    for i, (r, eps) in enumerate(product([1, 2], [1e-2, 1e-3])):
        for j in range(5):
            _, _, m = gen_noisy_product(8, 7, r, eps, seed=7000 + 10 * i + j)
            res = approx_nmf(m, r, eps)
            f = res.factorization
            bound = 10 * eps ** 0.5 * r ** 0.25 * np.linalg.norm(m)
            ok = (f.residual_fro <= bound and f.inner_dim == r
                  and f.a.min() >= 0 and f.w.min() >= 0)
            worst = max(worst, f.residual_fro / bound)
            failures += not ok
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed <= 600
    return _emit(capsys, 7, ok, f"{20 - failures}/20 within bound, worst residual/bound "
                 f"{worst:.4f}, {elapsed:.1f}s of 600s")


def _dsum_instances(rng):
    """Ten (values, d, chosen) triples whose chosen values sum to d/2."""
    out = []
    while len(out) < 10:
        d = 1 + len(out) % 3
        picks = list(rng.choice(np.arange(1, 20) / 20, size=d - 1))
        last = d / 2 - sum(picks)
        if not 0 <= last <= 1:
            continue
        picks.append(round(last, 12))
        distract = [v for v in rng.choice(np.arange(1, 40) / 40, size=3, replace=False)
                    if v not in picks]
        values = sorted(set(picks) | set(distract))
        chosen = [values.index(v) for v in picks]
        out.append((values, d, chosen))
    return out


def criterion_8(capsys=None):
    bad_counts = [(n, eps) for n in range(1, 21) for eps in (0.005, 0.01, 0.019)
                  if len(build_gadget_2d(np.linspace(0.02, 0.98, n) if n > 1 else [0.5],
                                         eps).vertices) != 3 * n]
    rng = np.random.default_rng(8)
    true_ok = false_ok = 0
    for values, d, chosen in _dsum_instances(rng):
        inst = build_intermediate_simplex(values, d, 0.01)
        true_ok += verify_completeness(inst, chosen)
        wrong = list(chosen)
        while abs(sum(inst.gadget.values[k] for k in wrong) - d / 2) < 1e-9:
            wrong[0] = (wrong[0] + 1) % len(values)
        false_ok += not verify_completeness(inst, wrong)
    ok = not bad_counts and true_ok == 10 and false_ok == 10
    return _emit(capsys, 8, ok, f"{60 - len(bad_counts)}/60 gadgets with 3N vertices, "
                 f"{true_ok}/10 true, {false_ok}/10 false")


def criterion_9(capsys=None):
    eps = 0.01
    violations = 0
    for i in range(50):
        r = 2 + i % 4
        a, w, m = gen_noisy_product(10, 9, r, eps, seed=9000 + i)
        for delta in (0.1, 0.3):
            d = w0_diagnostics(m, a, w, delta)
            violations += d["w0_residual"] > eps * d["m_norm"] + delta * np.sqrt(r) * d["m_norm"]
            violations += d["w0_prime_gap"] > 2 * eps / delta
    rng = np.random.default_rng(9)
    worst = 0.0
    for i in range(20):
        b = rng.uniform(size=(7, 2))
        a = b @ np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
        w = rng.uniform(size=(3, 9)) * (rng.uniform(size=(3, 9)) < 0.7)
        ch = build_proper_chain(a, w)
        worst = max(worst, np.abs(ch.reconstruct_w_prime() - ch.w_prime).max(),
                    np.abs(ch.reconstruct_a_prime() - ch.a_prime).max())
    ok = violations == 0 and worst <= 1e-8
    return _emit(capsys, 9, ok, f"{violations} lemma violations over 200 checks, "
                 f"worst reconstruction error {worst:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(check, capsys):
    assert check(capsys)


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
