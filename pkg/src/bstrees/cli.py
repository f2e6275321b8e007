"""Command-line front end.

Every command reads an instance config (``--config path.json`` or JSON on
stdin), e.g.::

    {"family": "amalgam",
     "gamma0": {"domain": 3, "generators": ["(0 1)", "(0 1 2)"]},
     "gamma1": {"domain": 3, "generators": ["(0 1)", "(0 1 2)"]},
     "caps": {"ballRadius": 8, "pathDepth": 3, "syllableLength": 3}}

Exit codes: 0 ok, 1 failed verification, 2 parse/usage error, 3 contract violation.
"""
from __future__ import annotations

import itertools
import json
import os
import random
import re
import sys
from dataclasses import dataclass, field

import click

from . import amalgam_core, bs23, hnn_core, tree_dynamics, words
from .words import Token

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CONTRACT = 0, 1, 2, 3
CAP_ENV = "BSL_CAP_OVERRIDE"
DEFAULT_CAPS = {"ballRadius": 8, "pathDepth": 3, "syllableLength": 3}
SUITES = ("relations", "quasikernels", "homomorphisms", "faithfulness", "bs23", "fledge")


class ConfigError(ValueError):
    pass


PARSE_ERRORS = (ConfigError, json.JSONDecodeError, words.WordSyntaxError, words.UnknownGeneratorError,
                amalgam_core.InvalidGeneratorError, amalgam_core.InvalidPathError,
                hnn_core.InvalidGeneratorError, hnn_core.InvalidPathError)


# ---------------------------------------------------------------- instances

@dataclass
class InstanceConfig:
    family: str
    groups: dict = field(default_factory=dict)
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))

    @classmethod
    def from_json(cls, data) -> "InstanceConfig":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        fam = data.get("family")
        if fam not in ("amalgam", "hnn", "bs23"):
            raise ConfigError(f"unknown family {fam!r}")
        caps = dict(DEFAULT_CAPS)
        caps.update(data.get("caps", {}))
        for k, v in caps.items():
            if not isinstance(v, int) or v <= 0:
                raise ConfigError(f"cap {k} must be a positive integer")
        override = os.environ.get(CAP_ENV)
        if override:
            try:
                caps["ballRadius"] = int(override)
            except ValueError:
                raise ConfigError(f"{CAP_ENV} must be an integer") from None
        keys = {"amalgam": ("gamma0", "gamma1"), "hnn": ("sigmaM", "sigmaP"), "bs23": ()}[fam]
        missing = [k for k in keys if k not in data]
        if missing:
            raise ConfigError(f"missing group block(s): {', '.join(missing)}")
        return cls(fam, {k: data[k] for k in keys}, caps)

    def to_json(self) -> dict:
        return {"family": self.family, **self.groups, "caps": dict(self.caps)}

    def build(self) -> "Instance":
        try:
            if self.family == "amalgam":
                fam = amalgam_core.Amalgam(amalgam_core.AmalgamParams.from_json(self.groups))
                oracle = amalgam_core.AmalgamOracle(fam)
                gens = amalgam_core.generator_tokens(fam, 0)
            elif self.family == "hnn":
                fam = hnn_core.Hnn(hnn_core.HnnParams.from_json(self.groups))
                oracle = hnn_core.HnnOracle(fam)
                gens = hnn_core.generator_tokens(fam, 0)
            else:
                fam = None
                oracle = bs23.oracle()
                gens = [Token("b"), Token("t")]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad group block: {exc}") from None
        except ValueError as exc:
            if isinstance(exc, PARSE_ERRORS):
                raise
            raise ConfigError(str(exc)) from None
        tree = tree_dynamics.Tree(oracle, [[g] for g in gens], cap=self.caps["ballRadius"],
                                  name=self.family)
        return Instance(self, fam, oracle, tree)


@dataclass
class Instance:
    config: InstanceConfig
    fam: object
    oracle: object
    tree: tree_dynamics.Tree

    @property
    def family(self) -> str:
        return self.config.family

    def word(self, text: str):
        return words.reduce(words.parse_word(text), self.oracle)

    def text(self, w) -> str:
        return words.word_to_text(w, self.oracle)

    def vertex_text(self, v) -> str:
        return bs23.vertex_text(v) if self.family == "bs23" else self.tree.vertex_text(v)

    def vertex(self, text: str):
        """A vertex written as a word followed by a vertex-group marker (G0, G1, G or <b>)."""
        m = re.search(r"(?:^|[*\s])\s*(G[01]?|<b>)\s*$", text)
        group = 0
        if m:
            marker = m.group(1)
            text = text[:m.start()].rstrip().rstrip("*")
            if marker in ("G0", "G1"):
                if self.family != "amalgam":
                    raise ConfigError(f"marker {marker} needs an amalgam instance")
                group = int(marker[1])
        nf = self.word(text) if text.strip() else words.identity_word(self.oracle)
        return self.tree.vertex_of(nf, group)


# ---------------------------------------------------------------- suites

def _random_word(rng: random.Random, gens: list[Token], max_len: int) -> list[Token]:
    out = []
    for _ in range(rng.randint(1, max_len)):
        t = rng.choice(gens)
        out.append(t if rng.random() < 0.5 else t.inverse())
    return out


def _result(name: str, checked: int, failures: list, **extra) -> dict:
    return {"suite": name, "ok": not failures, "checked": checked,
            "failures": failures[:10], "failureCount": len(failures), **extra}


def suite_relations(inst: Instance, rng: random.Random, **_) -> dict:
    if inst.family == "bs23":
        O = inst.oracle
        pairs = [("t^-1 * b^2 * t", "b^3"), ("t * b^3 * t^-1", "b^2"), ("t * b^9 * t^-1", "b^6"),
                 ("t^-1 * b^4 * t", "b^6")]
        fails = [f"{a} != {b}" for a, b in pairs if inst.word(a) != inst.word(b)]
        return _result("relations", len(pairs), fails)
    mod = amalgam_core if inst.family == "amalgam" else hnn_core
    rep = mod.relation_suite(inst.fam, inst.config.caps["pathDepth"])
    fails = [str(f) for f in rep.failures]
    return _result("relations", rep.total, fails, counts=dict(rep.counts))


def suite_quasikernels(inst: Instance, rng: random.Random, length: int | None = None, **_) -> dict:
    fails = []
    n = 0
    if inst.family == "amalgam":
        L = 3 if length is None else length
        fam = inst.fam
        for side in (0, 1):
            for a in amalgam_core.enumerate_h(fam, 2, side):
                g = amalgam_core.GElem(fam, a)
                for j in (0, 1):
                    n += 1
                    if amalgam_core.quasiKernelMember(g, j) != amalgam_core.cJnMember(g, j, L):
                        fails.append(f"{words.format_word(fam.expand_n(a))} j={j}")
        return _result("quasikernels", n, fails, conjugatorLength=L)
    if inst.family == "hnn":
        L = 3 if length is None else length
        fam = inst.fam
        for a in hnn_core.enumerate_nodes(fam, 2):
            g = hnn_core.HnnElem(fam, a)
            for e in hnn_core.SIGNS:
                n += 1
                if hnn_core.kEpsMember(g, e) != hnn_core.kEpsOracle(g, e, L):
                    fails.append(f"{words.format_word(fam.expand_n(a))} eps={e}")
        return _result("quasikernels", n, fails, oracleLength=L)
    raise ConfigError("the quasikernels suite needs an amalgam or hnn instance")


def suite_homomorphisms(inst: Instance, rng: random.Random, samples: int = 500, **_) -> dict:
    fam, O = inst.fam, inst.oracle
    fails = []
    if inst.family == "amalgam":
        gens = amalgam_core.generator_tokens(fam, 2)
        hom = lambda w: amalgam_core.thetaHom(fam, w)
        combine = fam.theta_add
        is_trivial = lambda v: v == (0, 0)
        kernel = amalgam_core.n_generating_set(fam)
    elif inst.family == "hnn":
        gens = hnn_core.generator_tokens(fam, 2)
        hom = lambda w: hnn_core.etaHom(fam, w)
        combine = lambda a, b: a * b
        is_trivial = lambda v: v.is_identity()
        kernel = hnn_core.xi_generating_set(fam)
    else:
        raise ConfigError("the homomorphisms suite needs an amalgam or hnn instance")
    for k in range(samples):
        w1, w2 = _random_word(rng, gens, 4), _random_word(rng, gens, 4)
        prod = words.word_to_tokens(words.reduce(w1 + w2, O), O)
        if hom(prod) != combine(hom(w1), hom(w2)):
            fails.append(f"pair {k}: {words.format_word(w1)} | {words.format_word(w2)}")
    kernel_sample = kernel if len(kernel) <= samples else rng.sample(kernel, samples)
    for w in kernel_sample:
        if not is_trivial(hom(w)):
            fails.append(f"kernel generator {words.format_word(w)} not trivial")
    checked = samples + len(kernel_sample)
    if inst.family == "hnn":
        checked += 1
        v = hom([Token("t")])
        if v.shift != 1 or v.labels:
            fails.append("eta(t) is not the unit shift")
    return _result("homomorphisms", checked, fails)


def _faithful_pairs(inst: Instance, rng: random.Random, n_random: int, n_near: int):
    """(tokens_a, node_a, tokens_b, node_b) with portraits of depth <= 3."""
    fam = inst.fam
    if inst.family == "amalgam":
        gens = [t for t in amalgam_core.generator_tokens(fam, 3) if not (t.name == "g" and t.side == 1)]
        deep = [t for t in gens if len(t.path) == 3]
        node = lambda toks: fam.eval_tokens_n(toks, 0)
    else:
        gens = hnn_core.generator_tokens(fam, 3, with_t=False)
        deep = [t for t in gens if len(t.path) == 3]
        node = fam.eval_tokens_n
    out = []
    for k in range(n_random):
        a = _random_word(rng, gens, 4)
        b = fam.expand_n(node(a)) if k % 2 else _random_word(rng, gens, 4)
        out.append((a, node(a), b, node(b)))
    for _ in range(n_near):
        a = _random_word(rng, gens, 3)
        b = a + [rng.choice(deep)]
        out.append((a, node(a), b, node(b)))
    return out


def suite_faithfulness(inst: Instance, rng: random.Random, samples: int = 200, near: int = 50,
                       radius: int = 5, **_) -> dict:
    if inst.family == "bs23":
        raise ConfigError("the faithfulness suite needs an amalgam or hnn instance")
    O, T = inst.oracle, inst.tree
    fails = []
    pairs = _faithful_pairs(inst, rng, samples, near)
    same = 0
    for a, na, b, nb in pairs:
        ia = tree_dynamics.ball_images(words.reduce(a, O), T, radius)
        ib = tree_dynamics.ball_images(words.reduce(b, O), T, radius)
        same += na == nb
        if (na == nb) != (ia == ib):
            fails.append(f"{words.format_word(a)} vs {words.format_word(b)}")
    return _result("faithfulness", len(pairs), fails, structurallyEqual=same)


def _growth(T: tree_dynamics.Tree) -> tuple[dict, bool]:
    rep = tree_dynamics.fledgeReport("b^6", [4, 6, 8], T)
    d = [rep.diameterPerRadius[r] for r in (4, 6, 8)]
    return rep.diameterPerRadius, None not in d and d[0] < d[1] < d[2]


def suite_bs23(inst: Instance, rng: random.Random, **_) -> dict:
    if inst.family != "bs23":
        raise ConfigError("the bs23 suite needs the bs23 instance")
    rep = bs23.verifyB6(6)
    fails = [f"fixed {v} -> {w}" for v, w, ok in rep.fixed if not ok]
    fails += [f"moved {v} -> {w}" for v, w, ok in rep.moved if not ok]
    diam, grows = _growth(inst.tree)
    if not grows:
        fails.append(f"b^6 diameters not increasing: {diam}")
    return _result("bs23", len(rep.fixed) + len(rep.moved) + 1, fails,
                   diameters={str(k): v for k, v in diam.items()})


def elliptic_sample(inst: Instance, max_depth: int = 2, max_tokens: int = 2) -> list:
    """Distinct non-trivial elliptic normal forms of products of at most ``max_tokens``
    generators (and inverses) of depth at most ``max_depth``, with their generator depth."""
    O = inst.oracle
    if inst.family == "amalgam":
        gens = amalgam_core.generator_tokens(inst.fam, max_depth)
    else:
        gens = hnn_core.generator_tokens(inst.fam, max_depth)
    gens = gens + [g.inverse() for g in gens]
    seen = {}
    for n in range(1, max_tokens + 1):
        for combo in itertools.product(gens, repeat=n):
            w = words.reduce(list(combo), O)
            if w in seen or words.is_identity_word(w, O):
                continue
            seen[w] = max(len(t.path) for t in combo)
    return [(w, d) for w, d in seen.items()
            if isinstance(words.classify(w, O), words.Elliptic)]


def suite_fledge(inst: Instance, rng: random.Random, **_) -> dict:
    if inst.family == "bs23":
        diam, grows = _growth(inst.tree)
        return _result("fledge", 1, [] if grows else [f"b^6 diameters {diam}"])
    top = inst.config.caps["ballRadius"]
    fails = []
    sample = elliptic_sample(inst)
    for w, d in sample:
        radii = list(range(d + 2, top + 1))
        rep = tree_dynamics.fledgeReport(w, radii, inst.tree)
        if len(set(rep.diameterPerRadius.values())) != 1 or None in rep.diameterPerRadius.values():
            fails.append(f"{inst.text(w)}: {rep.diameterPerRadius}")
    return _result("fledge", len(sample), fails)


SUITE_FUNCS = {"relations": suite_relations, "quasikernels": suite_quasikernels,
               "homomorphisms": suite_homomorphisms, "faithfulness": suite_faithfulness,
               "bs23": suite_bs23, "fledge": suite_fledge}


# ---------------------------------------------------------------- output

def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(ctx: click.Context, obj: dict, text: str):
    click.echo(dump_json(obj) if ctx.obj["json"] else text)


def _inst(ctx: click.Context) -> Instance:
    if "inst" not in ctx.obj:
        path = ctx.obj["config"]
        if path:
            try:
                with open(path) as fh:
                    raw = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        else:
            if sys.stdin is None or sys.stdin.isatty():
                raise ConfigError("no config: pass --config or pipe JSON on stdin")
            raw = sys.stdin.read()
        ctx.obj["inst"] = InstanceConfig.from_json(raw).build()
    return ctx.obj["inst"]


# ---------------------------------------------------------------- commands

@click.group()
@click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
              help="Instance JSON (default: read from stdin).")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized suites.")
@click.pass_context
def cli(ctx, config, as_json, seed):
    """Bass-Serre tree toolkit for amalgams, HNN extensions and BS(2,3)."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, json=as_json, seed=seed)


@cli.command()
@click.argument("word")
@click.pass_context
def reduce(ctx, word):
    """Normal form of WORD."""
    inst = _inst(ctx)
    w = inst.word(word)
    _emit(ctx, {"input": word, "normalForm": inst.text(w), "syllables": len(w.syllables),
                "tokens": [t.to_json() for t in words.word_to_tokens(w, inst.oracle)]}, inst.text(w))


@cli.command()
@click.argument("w1")
@click.argument("w2")
@click.pass_context
def mul(ctx, w1, w2):
    """Normal form of W1 * W2."""
    inst = _inst(ctx)
    w = words.mul_word(inst.word(w1), inst.word(w2), inst.oracle)
    _emit(ctx, {"product": inst.text(w)}, inst.text(w))


@cli.command()
@click.argument("word")
@click.argument("vertex")
@click.pass_context
def act(ctx, word, vertex):
    """Image of VERTEX (a word followed by G0/G1/G/<b>) under WORD."""
    inst = _inst(ctx)
    v = inst.vertex(vertex)
    img = tree_dynamics.actOnVertex(inst.word(word), v, inst.tree)
    _emit(ctx, {"vertex": inst.vertex_text(v), "image": inst.vertex_text(img), "fixed": img == v},
          inst.vertex_text(img))


@cli.command()
@click.argument("radius", type=int)
@click.pass_context
def ball(ctx, radius):
    """Ball of RADIUS around the base vertex."""
    inst = _inst(ctx)
    T = inst.tree
    b = tree_dynamics.ball(radius, T)
    degrees = {}
    for v in b.vertices:
        if b.dist[v] < radius:
            d = T.degree(v)
            degrees[str(d)] = degrees.get(str(d), 0) + 1
    obj = {"radius": radius, "vertices": len(b), "edges": len(b.edges()), "interiorDegrees": degrees,
           "spheres": {str(r): sum(1 for v in b.vertices if b.dist[v] == r) for r in range(radius + 1)}}
    _emit(ctx, obj, f"{len(b)} vertices, {len(b.edges())} edges, interior degrees {degrees}")


@cli.command()
@click.argument("word")
@click.pass_context
def classify(ctx, word):
    """Elliptic (with a fixed vertex) or hyperbolic (with translation length)."""
    inst = _inst(ctx)
    w = inst.word(word)
    c = words.classify(w, inst.oracle)
    if isinstance(c, words.Elliptic):
        wit = inst.tree.vertex_text(c.witness)
        _emit(ctx, {"kind": "elliptic", "witness": wit}, f"elliptic, fixes {wit}")
    else:
        ell = tree_dynamics.translation_length(w, inst.tree)
        _emit(ctx, {"kind": "hyperbolic", "translationLength": ell},
              f"hyperbolic, translation length {ell}")


def _radii(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter("radii must be comma separated integers") from None


@cli.command()
@click.argument("word")
@click.option("--radii", default="4,6,8", show_default=True)
@click.pass_context
def fledge(ctx, word, radii):
    """Diameter of the hull of the boundary fixed points across radii."""
    inst = _inst(ctx)
    rep = tree_dynamics.fledgeReport(inst.word(word), _radii(radii), inst.tree)
    obj = rep.to_json(inst.tree)
    _emit(ctx, obj, f"{obj['verdict']}: " + ", ".join(f"R={r}: {d}" for r, d in obj["diameterPerRadius"].items()))


@cli.command()
@click.argument("which", type=click.Choice(["theta", "eta"]))
@click.argument("word")
@click.pass_context
def hom(ctx, which, word):
    """Evaluate theta (amalgam) or eta (hnn) on WORD."""
    inst = _inst(ctx)
    toks = words.parse_word(word)
    if which == "theta":
        if inst.family != "amalgam":
            raise ConfigError("theta needs an amalgam instance")
        words.reduce(toks, inst.oracle)
        v = amalgam_core.thetaHom(inst.fam, toks)
        _emit(ctx, {"theta": list(v), "inN": v == (0, 0)}, f"theta = {v}")
    else:
        if inst.family != "hnn":
            raise ConfigError("eta needs an hnn instance")
        words.reduce(toks, inst.oracle)
        v = hnn_core.etaHom(inst.fam, toks)
        obj = {"eta": v.to_json(), "inXi": v.is_identity()}
        _emit(ctx, obj, f"shift {v.shift}, labels {obj['eta']['labels']}")


@cli.command()
@click.argument("suite", type=click.Choice(SUITES))
@click.option("--length", type=int, default=None,
              help="Conjugator length for the quasikernels oracle (default 3).")
@click.pass_context
def verify(ctx, suite, length):
    """Run a verification suite; exit 1 on any failure."""
    inst = _inst(ctx)
    rng = random.Random(ctx.obj["seed"])
    res = SUITE_FUNCS[suite](inst, rng, length=length)
    status = "PASS" if res["ok"] else "FAIL"
    lines = [f"{status} {suite}: {res['checked']} checks, {res['failureCount']} failures"]
    lines += [f"  {f}" for f in res["failures"]]
    _emit(ctx, res, "\n".join(lines))
    ctx.exit(EXIT_OK if res["ok"] else EXIT_FAIL)


@cli.command("export-dot")
@click.argument("radius", type=int)
@click.option("--word", default=None, help="Colour fixed/moved/boundary/hull vertices of this element.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def export_dot(ctx, radius, word, out):
    """Graphviz rendering of the ball of RADIUS."""
    inst = _inst(ctx)
    b = tree_dynamics.ball(radius, inst.tree)
    text = tree_dynamics.to_dot(b, inst.tree, inst.word(word) if word else None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------- entry points

def run(argv: list[str] | None = None) -> int:
    """Run the CLI and return the exit code instead of exiting."""
    try:
        rc = cli.main(args=argv, prog_name="bstrees", standalone_mode=False)
        return rc if isinstance(rc, int) else EXIT_OK
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_PARSE
    except click.Abort:
        return EXIT_FAIL
    except PARSE_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_PARSE
    except Exception as exc:  # contract violations and anything unexpected
        click.echo(f"contract violation: {type(exc).__name__}: {exc}", err=True)
        return EXIT_CONTRACT


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
