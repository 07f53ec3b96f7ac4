"""Reference logits for the frozen 6-word fixture model.

Writes fixtures/tiny_model_logits.txt. The parameters are produced by a closed
formula (see `param`) so the Rust test can rebuild the same model; the forward
pass below is an independent scalar implementation in float64.

Shapes: V=6, E=4, H=3. Tensor declaration order:
  0 embedding V x E
  1 layer1.w 4H x E   2 layer1.u 4H x H   3 layer1.b 4H x 1
  4 layer2.w 4H x H   5 layer2.u 4H x H   6 layer2.b 4H x 1
  7 proj.w V x H      8 proj.b V x 1
Gate rows ordered [input, forget, candidate, output].
"""

import math
import pathlib

V, E, H = 6, 4, 3
INPUT = [2, 4, 5]


def param(tensor, index):
    return 0.3 * math.sin(1.7 * (index + 1) + 0.9 * tensor)


def build(tensor, rows, cols):
    return [[param(tensor, r * cols + c) for c in range(cols)] for r in range(rows)]


def sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def cell(w, u, b, x, h, c):
    z = []
    for r in range(4 * H):
        acc = b[r][0]
        for k in range(len(x)):
            acc += w[r][k] * x[k]
        for k in range(H):
            acc += u[r][k] * h[k]
        z.append(acc)
    hn, cn = [], []
    for k in range(H):
        i, f, g, o = sig(z[k]), sig(z[H + k]), math.tanh(z[2 * H + k]), sig(z[3 * H + k])
        cc = f * c[k] + i * g
        cn.append(cc)
        hn.append(o * math.tanh(cc))
    return hn, cn


def main():
    emb = build(0, V, E)
    l1 = (build(1, 4 * H, E), build(2, 4 * H, H), build(3, 4 * H, 1))
    l2 = (build(4, 4 * H, H), build(5, 4 * H, H), build(6, 4 * H, 1))
    pw, pb = build(7, V, H), build(8, V, 1)
    h1, c1 = [0.0] * H, [0.0] * H
    h2, c2 = [0.0] * H, [0.0] * H
    rows = []
    for tok in INPUT:
        h1, c1 = cell(*l1, emb[tok], h1, c1)
        h2, c2 = cell(*l2, h1, h2, c2)
        rows.append([pb[v][0] + sum(pw[v][k] * h2[k] for k in range(H)) for v in range(V)])
    out = pathlib.Path(__file__).resolve().parents[4] / "fixtures" / "tiny_model_logits.txt"
    with open(out, "w") as fh:
        fh.write("# logits for input ids 2 4 5; one row per step, V=6 columns\n")
        for row in rows:
            fh.write(" ".join(repr(v) for v in row) + "\n")
    print("wrote", out)


if __name__ == "__main__":
    main()
