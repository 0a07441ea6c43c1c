"""Regenerate the bundled example networks under src/gibmap/networks/."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "gibmap" / "networks"


def boolean(name, p_true, parents=(), rows=None):
    if rows is None:
        rows = [({}, p_true)]
    return {
        "name": name,
        "values": ["t", "f"],
        "parents": list(parents),
        "concepts": [],
        "cpt": [{"given": g, "p": {"t": p, "f": round(1 - p, 12)}} for g, p in rows],
    }


def chain(p_bt_at, p_bt_af):
    return {"variables": [
        boolean("A", 0.6),
        boolean("B", None, ["A"], [({"A": "t"}, p_bt_at), ({"A": "f"}, p_bt_af)]),
    ]}


def vee():
    c_rows = [
        ({"A": "t", "B": "t"}, 0.8),
        ({"A": "t", "B": "f"}, 0.8),
        ({"A": "f", "B": "t"}, 0.3),
        ({"A": "f", "B": "f"}, 0.5),
    ]
    return {"variables": [boolean("A", 0.6), boolean("B", 0.5), boolean("C", None, ["A", "B"], c_rows)]}


def tracks():
    methods = [f"m{i}" for i in range(1, 100)]
    values = methods + ["none"]
    method_rows = [
        {"given": {"intend-to-go": "t"}, "p": {v: 0.01 for v in values}},
        {"given": {"intend-to-go": "f"}, "p": {v: (1.0 if v == "none" else 0.0) for v in values}},
    ]
    at_rows = []
    for m in values:
        for k in ("t", "f"):
            p = 1.0 if (m != "none" or k == "t") else 0.0
            at_rows.append({"given": {"method": m, "kidnapped": k}, "p": {"T": p, "F": round(1 - p, 12)}})
    return {"variables": [
        boolean("intend-to-go", 0.05),
        boolean("kidnapped", 0.001),
        {
            "name": "method",
            "values": values,
            "parents": ["intend-to-go"],
            "concepts": [{"name": "some-method", "values": methods}],
            "cpt": method_rows,
        },
        {
            "name": "at-tracks",
            "values": ["T", "F"],
            "parents": ["method", "kidnapped"],
            "concepts": [],
            "cpt": at_rows,
        },
    ]}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    nets = {"chain": chain(0.7, 0.7), "dep": chain(0.9, 0.2), "vee": vee(), "tracks": tracks()}
    for name, raw in nets.items():
        (OUT / f"{name}.json").write_text(json.dumps(raw, indent=1) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
