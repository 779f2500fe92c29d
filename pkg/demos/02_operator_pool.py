"""How the rotation pool is distilled from the interaction.

In the mode register the on-site repulsion becomes a table of momentum
conserving scattering moves.  Most entries never make it into the pool:
density-density moves are diagonal, same-mode moves collapse to fewer than
four distinct orbitals, degenerate moves have no energy gap to divide by,
and each surviving pair of conjugate orientations is represented once.

    python3 demos/02_operator_pool.py
"""

from vipsa import GridSpec, build_pool, interaction_quadruples, spin_operators
from vipsa.lattice import DEGENERACY_TOL


def classify(grid):
    quads = interaction_quadruples(grid)
    counts = {"diagonal": 0, "one-sided": 0, "zero-gap": 0, "kept": 0}
    for q in quads:
        if q.is_diagonal:
            counts["diagonal"] += 1
        elif q.up_to == q.up_from or q.down_to == q.down_from:
            counts["one-sided"] += 1
        elif abs(q.energy_gap) <= DEGENERACY_TOL:
            counts["zero-gap"] += 1
        else:
            counts["kept"] += 1
    return len(quads), counts


def main():
    print("Quadruple table and pool size per grid:")
    for shape in ((2, 2), (2, 3), (2, 4), (3, 3)):
        grid = GridSpec.make(*shape, u=4.0)
        total, counts = classify(grid)
        pool = build_pool(grid)
        print(f"  {grid.label()}: {total} table entries -> "
              f"{counts['diagonal']} diagonal, {counts['one-sided']} one-sided, "
              f"{counts['zero-gap']} zero-gap, {counts['kept']} kept "
              f"= 2 x {len(pool)} pool rotations")

    # the full 2x2 pool, small enough to print
    grid = GridSpec.make(2, 2, u=4.0)
    print(f"\nThe {grid.label()} pool at u = {grid.u:g} "
          "(label, amplitude, energy gap):")
    for p in build_pool(grid):
        print(f"  {p.label:<12} V = {p.amplitude:+.4f}   eps = {p.eps:+.4f}")

    # structural checks on the generators, in the Pauli algebra itself
    pool = build_pool(grid)
    s_z, s_squared = spin_operators(grid.n_sites)
    broke_s2 = 0
    for p in pool:
        g = p.generator(grid.n_qubits)
        assert len(g + g.dagger()) == 0                      # anti-Hermitian
        assert len(g * s_z - s_z * g) == 0
        if len(g * s_squared - s_squared * g) > 0:
            broke_s2 += 1
    print("\nEvery generator is anti-Hermitian and commutes with S_z;")
    print(f"{broke_s2} of {len(pool)} do not commute with S^2, so the"
          " adaptive state may leave the spin sector of the reference.")


if __name__ == "__main__":
    main()
