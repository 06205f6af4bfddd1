"""Float64 reference for the encoder, heads and losses.

Parameters follow a closed-form fill so the C++ test can reproduce them
without sharing files: element i of the p-th parameter (store order,
row-major) is 0.25 * sin(0.37 * (i + 1) + 1.3 * (p + 1)), plus 1 for
layer-norm gains.

Writes tests/data/oracle/torch_encoder.json.
"""

import json
import math
import pathlib

import torch

torch.set_default_dtype(torch.float64)

V, D, HEADS, FFN, MAX_LEN = 12, 8, 2, 16, 16


def param_shapes(layers):
    shapes = [("embed.token", (V, D)), ("embed.position", (MAX_LEN, D)),
              ("embed.ln.gamma", (1, D)), ("embed.ln.beta", (1, D))]
    for l in range(layers):
        p = f"layer{l}."
        for proj in "qkvo":
            shapes += [(p + f"attn.{proj}.weight", (D, D)), (p + f"attn.{proj}.bias", (1, D))]
        shapes += [(p + "attn.ln.gamma", (1, D)), (p + "attn.ln.beta", (1, D)),
                   (p + "ffn.in.weight", (D, FFN)), (p + "ffn.in.bias", (1, FFN)),
                   (p + "ffn.out.weight", (FFN, D)), (p + "ffn.out.bias", (1, D)),
                   (p + "ffn.ln.gamma", (1, D)), (p + "ffn.ln.beta", (1, D))]
    for head in ("cs", "cet"):
        shapes += [(head + ".hidden.weight", (D, D)), (head + ".hidden.bias", (1, D)),
                   (head + ".out.weight", (D, 1)), (head + ".out.bias", (1, 1))]
    shapes += [("mlm.transform.weight", (D, D)), ("mlm.transform.bias", (1, D)),
               ("mlm.ln.gamma", (1, D)), ("mlm.ln.beta", (1, D)), ("mlm.bias", (1, V))]
    return shapes


def make_params(layers):
    params = {}
    for p, (name, shape) in enumerate(param_shapes(layers)):
        n = shape[0] * shape[1]
        vals = [0.25 * math.sin(0.37 * (i + 1) + 1.3 * (p + 1)) for i in range(n)]
        t = torch.tensor(vals).reshape(shape)
        if name.endswith("gamma"):
            t = t + 1.0
        params[name] = t.clone().requires_grad_(True)
    return params


def layer_norm(x, g, b):
    mean = x.mean(dim=1, keepdim=True)
    var = ((x - mean) ** 2).mean(dim=1, keepdim=True)
    return (x - mean) / torch.sqrt(var + 1e-5) * g + b


def gelu(x):
    return 0.5 * x * (1.0 + torch.erf(x / math.sqrt(2.0)))


def encode_one(P, layers, ids):
    n = len(ids)
    x = P["embed.token"][ids] + P["embed.position"][list(range(n))]
    x = layer_norm(x, P["embed.ln.gamma"], P["embed.ln.beta"])
    dh = D // HEADS
    for l in range(layers):
        p = f"layer{l}."
        lin = lambda t, name: t @ P[p + name + ".weight"] + P[p + name + ".bias"]
        q, k, v = lin(x, "attn.q"), lin(x, "attn.k"), lin(x, "attn.v")
        outs = []
        for h in range(HEADS):
            sl = slice(h * dh, (h + 1) * dh)
            s = q[:, sl] @ k[:, sl].T / math.sqrt(dh)
            outs.append(torch.softmax(s, dim=1) @ v[:, sl])
        a = lin(torch.cat(outs, dim=1), "attn.o")
        x = layer_norm(x + a, P[p + "attn.ln.gamma"], P[p + "attn.ln.beta"])
        f = lin(gelu(lin(x, "ffn.in")), "ffn.out")
        x = layer_norm(x + f, P[p + "ffn.ln.gamma"], P[p + "ffn.ln.beta"])
    return x


def mlp(P, prefix, x):
    h = gelu(x @ P[prefix + ".hidden.weight"] + P[prefix + ".hidden.bias"])
    return h @ P[prefix + ".out.weight"] + P[prefix + ".out.bias"]


BATCH = [
    {"positive": [1, 5, 6, 7, 8, 2], "event": [2, 4],
     "event_negatives": [[1, 5, 9, 10, 11, 8, 2], [1, 5, 4, 8, 2]],
     "replaced_events": [[2, 5], [2, 3]],
     "relation_negatives": [[1, 9, 6, 7, 8, 2], [1, 10, 11, 6, 7, 8, 2]]},
    {"positive": [1, 4, 5, 6, 2], "event": [1, 3],
     "event_negatives": [[1, 7, 8, 6, 2], [1, 9, 10, 11, 6, 2]],
     "replaced_events": [[1, 3], [1, 4]],
     "relation_negatives": [[1, 4, 5, 6, 11, 2], [1, 3, 5, 6, 2]]},
]

MLM = [
    {"input": [1, 3, 6, 3, 8, 2], "positions": [1, 3], "targets": [5, 7]},
    {"input": [1, 4, 3, 9, 2], "positions": [2, 3], "targets": [10, 9]},
]


def contrastive(P, layers):
    cer, drr, cet = 0.0, 0.0, 0.0
    for item in BATCH:
        hp = encode_one(P, layers, item["positive"])
        hev = [encode_one(P, layers, s) for s in item["event_negatives"]]
        hrel = [encode_one(P, layers, s) for s in item["relation_negatives"]]
        score = lambda h: mlp(P, "cs", h[0:1])[0, 0]
        s_pos = score(hp)
        cer = cer - torch.log_softmax(torch.stack([s_pos] + [score(h) for h in hev]), 0)[0]
        drr = drr - torch.log_softmax(torch.stack([s_pos] + [score(h) for h in hrel]), 0)[0]
        b, e = item["event"]
        logit = mlp(P, "cet", hp[b:e])[:, 0]
        cet = cet + torch.nn.functional.softplus(logit).sum()  # label 0
        for h, (rb, re) in zip(hev, item["replaced_events"]):
            logit = mlp(P, "cet", h[rb:re])[:, 0]
            cet = cet + torch.nn.functional.softplus(-logit).sum()  # label 1
    n = len(BATCH)
    return cer / n, cet / n, drr / n


def mlm(P, layers):
    total, count = 0.0, 0
    for item in MLM:
        h = encode_one(P, layers, item["input"])[item["positions"]]
        t = gelu(h @ P["mlm.transform.weight"] + P["mlm.transform.bias"])
        t = layer_norm(t, P["mlm.ln.gamma"], P["mlm.ln.beta"])
        logits = t @ P["embed.token"].T + P["mlm.bias"]
        total = total - torch.log_softmax(logits, 1)[range(len(item["targets"])), item["targets"]].sum()
        count += len(item["targets"])
    return total / count


def grads(P, loss):
    for t in P.values():
        t.grad = None
    loss.backward()
    return {k: (t.grad if t.grad is not None else torch.zeros_like(t)).flatten().tolist()
            for k, t in P.items()}


def main():
    out = {"batch": BATCH, "mlm": MLM, "models": []}
    for layers in (1, 2):
        P = make_params(layers)
        cer, cet, drr = contrastive(P, layers)
        total = cer + cet + drr
        hidden = encode_one(P, layers, BATCH[0]["positive"]).detach()
        entry = {
            "layers": layers,
            "hidden_positive0": hidden.flatten().tolist(),
            "cer": cer.item(), "cet": cet.item(), "drr": drr.item(), "total": total.item(),
            "total_grad": grads(P, total),
        }
        P = make_params(layers)
        m = mlm(P, layers)
        entry["mlm"] = m.item()
        entry["mlm_grad"] = grads(P, m)
        out["models"].append(entry)
    path = pathlib.Path(__file__).resolve().parents[1] / "data" / "oracle" / "torch_encoder.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
