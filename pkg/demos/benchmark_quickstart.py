"""Run two benchmark configurations and rank them, all from Python.

Builds a small synthetic blood-pressure cohort, evaluates the global
median baseline and a contour-feature MLP under the calibration-free
protocol (subject-disjoint splits), then merges the two reports into a
ranked comparison. Artifacts land in a temp directory that is printed
at the end so you can inspect the JSON/CSV outputs.

Run: python3 demos/benchmark_quickstart.py
"""

import tempfile
from pathlib import Path

from pulsebench.bench import RunConfig, compare, run
from pulsebench.data_io import save_segments
from pulsebench.synth import synth_bp_records


def main():
    work = Path(tempfile.mkdtemp(prefix="pulsebench_demo_"))
    records = synth_bp_records(400, seed=0)
    manifest = work / "synth_bp.manifest.json"
    save_segments(records, "synth_bp", work / "synth_bp.f32", manifest)
    print(f"cohort: {len(records)} segments -> {manifest}")

    report_paths = []
    for representation, model in (("cif", "baseline"), ("cif", "mlp")):
        cfg = RunConfig(task="bp_calibfree", representation=representation,
                        model=model, data=str(manifest), seed=0,
                        out=str(work / "runs"))
        result = run(cfg)
        report_paths.append(result.paths["report"])
        print(f"\n--- {cfg.label} ---")
        print(result.table, end="")

    table, summary = compare(report_paths)
    print("\n--- comparison (sorted by SBP MASE) ---")
    print(table, end="")
    print(f"\nbest: {summary['best']}")
    print(f"artifacts under: {work}")


if __name__ == "__main__":
    main()
