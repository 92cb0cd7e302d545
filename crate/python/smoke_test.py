"""Smoke test for the trotterr extension module."""

import cmath
import math
import random

import trotterr


def haar_state(n, rng):
    v = [complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(2**n)]
    s = math.sqrt(sum(abs(a) ** 2 for a in v))
    return [a / s for a in v]


def main():
    h = trotterr.Hamiltonian.heisenberg_1d(4, 7)
    assert h.n == 4 and h.group_labels == ["A", "B"], h
    same = trotterr.Hamiltonian.from_json(h.to_json())
    assert same.terms() == h.terms()

    for name in ["triangle", "tp", "alpha_comm", "counting", "interference"]:
        rep = trotterr.bound(h, name, 1, 0.0, 1)
        assert rep.value == 0.0, rep

    psi = haar_state(4, random.Random(3))
    exact = trotterr.exact_evolve(h, 1.0, psi)
    coarse = trotterr.trotter_evolve(h, 1, 1.0, 10, psi)
    fine = trotterr.trotter_evolve(h, 1, 1.0, 1000, psi)
    dist = lambda a, b: math.sqrt(sum(abs(x - y) ** 2 for x, y in zip(a, b)))
    assert dist(fine, exact) < dist(coarse, exact) / 50
    assert abs(sum(abs(a) ** 2 for a in fine) - 1.0) < 1e-12

    st = trotterr.empirical_error(h, 2, 4.0, 50, samples=10, seed=1)
    bnd = trotterr.bound(h, "triangle", 2, 4.0, 50)
    assert st.mean_sqrt_s <= bnd.value, (st, bnd)

    r_emp = trotterr.minimal_trotter_number(h, 1, 4.0, 1e-2, "empirical", samples=10, seed=1)
    r_tri = trotterr.minimal_trotter_number(h, 1, 4.0, 1e-2, "triangle")
    assert 1 <= r_emp <= r_tri, (r_emp, r_tri)

    value, method, _ = trotterr.haar_mean_sqrt([1.0, 0.0, 0.0, 0.0])
    want = math.sqrt(math.pi) / 2 * math.exp(math.lgamma(4) - math.lgamma(4.5))
    assert method == "exact" and abs(value - want) < 1e-12

    ex, tr, avg, worst = trotterr.otoc_values(h, 1.0, 1, 16)
    assert abs(ex - tr) <= avg <= worst * (1 + 1e-12)
    assert not cmath.isnan(ex)

    try:
        trotterr.Hamiltonian.heisenberg_1d(0, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("n = 0 accepted")

    print("smoke test passed:", trotterr.__version__, h)


if __name__ == "__main__":
    main()
