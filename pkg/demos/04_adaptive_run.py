"""One adaptive run, narrated epoch by epoch.

Each epoch measures every pool gradient on the current state, appends the
strongest rotations at angle zero, and re-optimizes all angles with ADAM.
The loop stops when the whole pool has gone quiet.

    python3 demos/04_adaptive_run.py
"""

from vipsa import GridSpec, VipsaConfig, vipsa_run


def main():
    grid = GridSpec.make(2, 2, u=4.0)
    config = VipsaConfig(max_epochs=8)
    print(f"Adaptive run on the {grid.label()} grid at u = {grid.u:g}:\n")

    def narrate(record):
        line = (f"  epoch {record.epoch}: max |g| {record.max_gradient:.4f}, "
                f"{record.n_selected} selected -> {record.n_params} gates, "
                f"E = {record.energy:.8f}, fidelity {record.fidelity:.4f}")
        print(line)
        if record.selected:
            print(f"    appended: {', '.join(record.selected)}")

    result = vipsa_run(grid, config=config, progress=narrate)

    print(f"\nStatus: {result.status} after {len(result.records)} epochs.")
    print(f"Exact ground energy {result.ground.energy:.8f} "
          f"(degeneracy {result.ground.degeneracy}).")
    gap = abs(result.final_energy - result.ground.energy)
    print(f"Final gap {gap:.2e}, fidelity {result.final_fidelity:.4f}, "
          f"{result.pool_size} pool rotations considered each epoch.")
    inner = sum(r.inner_steps for r in result.records)
    print(f"Total inner optimizer steps: {inner}.")


if __name__ == "__main__":
    main()
