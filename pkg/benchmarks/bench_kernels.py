"""Compare the compiled and pure-Python canonical-code kernels.

Times the kernel alone on partial states reached by the enumeration, then the
whole K-cell audit under each backend in a subprocess.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit
from pathlib import Path

from torus_height import _kernels_py
from torus_height.enumeration import Enumerator
from torus_height.serialize import load_instance
from torus_height.torus import build_mapping_torus

ROOT = Path(__file__).resolve().parent.parent

AUDIT = """
import json, sys, time
from torus_height import kernels
from torus_height.serialize import load_instance
from torus_height.verifier import audit_instance
inst = load_instance(sys.argv[1])
t0 = time.perf_counter()
rep = audit_instance(inst.psi, K=int(sys.argv[2]))
print(json.dumps({"backend": kernels.BACKEND, "seconds": time.perf_counter() - t0, "count": rep.count}))
"""


def sample_states(path, K, limit):
    torus = build_mapping_torus(load_instance(path).psi)
    en = Enumerator(torus, K, max_isolated=1)
    out = []
    frontier = list(en.initial())
    while frontier and len(out) < limit:
        nxt = []
        for st in frontier:
            masks = [0] * st.n
            for h, y in st.faces:
                masks[y] |= 1 << h
            out.append((st.n, en.sk.D, list(st.labels), masks, list(st.adj)))
            nxt.extend(en.expand(st))
        frontier = nxt
    return out[:limit]


def time_kernel(fn, states, repeat):
    return min(timeit.repeat(lambda: [fn(*s) for s in states], number=1, repeat=repeat))


def time_audit(path, K, pure):
    env = dict(os.environ)
    env.pop("TORUS_HEIGHT_PURE", None)
    if pure:
        env["TORUS_HEIGHT_PURE"] = "1"
    out = subprocess.run([sys.executable, "-c", AUDIT, str(path), str(K)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instance", default=str(ROOT / "instances" / "two_loops.json"))
    ap.add_argument("-K", type=int, default=5)
    ap.add_argument("--states", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    states = sample_states(args.instance, args.K, args.states)
    t_py = time_kernel(_kernels_py.canonical_code, states, args.repeat)
    print(f"kernel, {len(states)} states")
    print(f"  python  {t_py * 1e3:8.1f} ms")
    try:
        from torus_height import _kernels
    except ImportError:
        print("  cython  not built")
    else:
        same = all(_kernels.canonical_code(*s) == _kernels_py.canonical_code(*s) for s in states)
        t_cy = time_kernel(_kernels.canonical_code, states, args.repeat)
        print(f"  cython  {t_cy * 1e3:8.1f} ms  ({t_py / t_cy:.1f}x, identical codes: {same})")

    print(f"audit K={args.K} on {Path(args.instance).name}")
    for pure in (True, False):
        r = time_audit(args.instance, args.K, pure)
        print(f"  {r['backend']:7s} {r['seconds']:8.2f} s  ({r['count']} Y)")


if __name__ == "__main__":
    main()
