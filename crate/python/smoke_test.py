"""Smoke test for the christoffel_py extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math

import christoffel_py as cp


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    grid = cp.Grid(24)
    assert len(grid) == 24 * 48
    close(grid.integrate([1.0] * len(grid)), 4 * math.pi, 1e-12)

    # Δu + 2u = f with f = 2 − Y_2^0 has u = 1 + Y_2^0 / 4
    f = cp.Field.harmonic(grid, 16, 2.0, [(2, 0, -1.0)])
    u = cp.solve_christoffel(f, 1e-10)
    close(u.coeff(2, 0), 0.25, 1e-12)
    close(cp.christoffel_residual(u, f), 0.0, 1e-10)
    assert cp.hessian_min(u)["min_eig"] > 0

    try:
        cp.solve_christoffel(cp.Field.harmonic(grid, 16, 2.0, [(1, 0, 0.5)]))
    except cp.ChristoffelError as e:
        assert "OrthogonalityViolation" in str(e)
    else:
        raise AssertionError("degree-1 data was accepted")

    convex = cp.sweep(cp.Field.harmonic(grid, 16, 2.0, [(2, 0, 0.5)]))
    assert convex["overall"] == "holds", convex["overall"]
    bumpy = cp.sweep(cp.Field.harmonic(grid, 16, 2.0, [(2, 0, 4.0)]), ["cr2"])
    assert bumpy["overall"] == "fails"

    const = cp.Field.harmonic(grid, 8, 2.0)
    for angle in (0.0, 1.0, 2.5):
        close(cp.criterion_value(const, "cr2", (0.0, 0.6, 0.8), angle), 1.0, 1e-10)
    assert cp.sufficient_conditions(const)["pogorelov"]["holds"]

    v, info = cp.solve_lp(cp.Field.harmonic(grid, 8, 8.0), 4.0)
    assert info["converged"] and info["lemma41"]["holds"]
    close(max(abs(x - 0.5) for x in v.values()), 0.0, 1e-10)
    _, info = cp.solve_lp(cp.Field.harmonic(grid, 8, 1.0), 2.0)
    close(info["lambda"], 2.0, 1e-10)

    close(cp.omega_closed(0.3) * (1 - 0.3), -1.0, 1e-12)
    close(cp.omega_radial(0.3, 3), cp.omega_closed(0.3, 3), 1e-8)
    gamma = cp.gamma_const(2, 1.0)
    mc = cp.gamma_monte_carlo(2, 1.0, samples=200_000, seed=1)
    assert abs(mc["value"] - gamma) < 4 * mc["std_err"]

    body = cp.ellipsoid_support(grid, 1.0, 1.2, 0.8).analyzed(16)
    back = cp.solve_christoffel(cp.forward_f(body), 1e-10)
    r1, r2 = cp.principal_radii(back, (0.0, 0.0, 1.0))
    close(min(r1, r2), 1.0**2 / 0.8, 1e-4)
    close(max(r1, r2), 1.2**2 / 0.8, 1e-4)
    verts, faces = cp.embed(back)
    assert len(verts) == len(grid) and len(faces) > 0

    code, report = cp.run(["check", "--input", "family:harmonic:l=2,m=0,eps=4,base=2",
                           "--L", "16", "--Lmax", "10"])
    assert code == cp.EXIT_FAILS and report["verdict"] == "fails"

    print("smoke test passed")


if __name__ == "__main__":
    main()
