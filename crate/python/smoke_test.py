"""Smoke test for the skelhar Python extension.

Build and install first, e.g.:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/skelhar-*.whl
"""

import json
import tempfile
from pathlib import Path

import skelhar


def main():
    data = skelhar.generate_synthetic(participants=5, frames=55, seed=7)
    assert len(data) == 45, len(data)

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "data.csv"
        data.write(str(path))
        again = skelhar.Dataset.read(str(path))
        assert again.fingerprint() == data.fingerprint()

        rows, labels, groups = skelhar.extract(data, joints="c9", dims=3)
        assert len(rows) == 45 * 51 and len(rows[0]) == 24

        eigenvalues, k, projected = skelhar.pca(rows, 0.95)
        assert 1 <= k <= 24 and len(projected[0]) == k
        assert all(a >= b for a, b in zip(eigenvalues, eigenvalues[1:]))

        model = skelhar.train("knn", rows, labels, params=[("k", "1")])
        predicted = model.predict(rows)
        report = json.loads(skelhar.compute_report(labels, predicted))
        assert report["overall_accuracy"] == 1.0
        assert skelhar.Model.from_json(model.to_json()).predict(rows[:3]) == predicted[:3]

        config = skelhar.parse_config("classifier = tree\nmax-splits = 50\n")
        assert "max-splits = 50" in config
        out = Path(tmp) / "bundle"
        result = json.loads(skelhar.run_experiment(data, config, str(out)))
        assert result["cross_validation"]["overall_accuracy"] > 0.8
        assert sorted(p.name for p in out.iterdir()) == [
            "config.json", "confusion.csv", "model.json", "report.json",
        ]

    print("python smoke test passed")


if __name__ == "__main__":
    main()
