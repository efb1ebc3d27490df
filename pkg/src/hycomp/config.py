"""YAML configuration documents.

A document has optional top-level sections, each a mapping from names to
definitions.  Definitions may refer to names in any section; references are
resolved lazily and cycles are reported.

Grammar (keys in brackets are optional)::

    spaces:        NAME: {modes: {MODE: {box: [[lo, hi], ...], [coords: [c, ...]]}},
                          [arrows: {ID: {src: MODE, dst: MODE, [guard: GUARD], [reset: [EXPR, ...]]}
                                    | {src, dst, branches: [{[guard], [reset]}, ...]}]}
                 | NAME: {product: [SPACE, ...]} | NAME: {terminal: true}
    GUARD:         {COORD: VALUE | [lo, hi], ...}     VALUE pins the coordinate
    maps:          NAME: {kind: explicit, dom: SPACE, cod: SPACE, modes: {LABEL: LABEL},
                          arrows: {LABEL: [LABEL, ...]}, comps: {LABEL: [EXPR, ...]}}
                 | {kind: identity | terminal, space: SPACE}
                 | {kind: projection, space: SPACE, factor: INT}
                 | {kind: diagonal, space: SPACE, n: INT, [target: SPACE]}
                 | {kind: pair | tuple | product, maps: [MAP, ...], [target: SPACE]}
                 | {kind: compose, maps: [LAST, ..., FIRST]}
                 | {kind: pi, src: SPACE, target: SPACE, y_index: [...], x_index: [...],
                    phi: {X: Y}, Phi: {X: MAP}}
    systems:       NAME: {space: SPACE, field: {LABEL: [EXPR, ...]}}
                 | {product: [SYSTEM, ...]} | {network: NETWORK, open_systems: {X: OPEN}}
    submersions:   NAME: {tot: SPACE, st: SPACE, p: MAP} | {closed: SPACE} | {product: [SUB, ...]}
    open_systems:  NAME: {submersion: SUB, F: {LABEL: [EXPR, ...]}} | {product: [OPEN, ...]}
    ssub_maps:     NAME: {dom: SUB, cod: SUB, tot: MAP, st: MAP} | {identity: SUB}
    networks:      NAME: {index: [X, ...], tau: {X: SUB}, base: SUB,
                          psi: {tot: MAP | components: {X: MAP}, [st: MAP | st_components: {X: MAP}],
                                [st_inverse: identity | {LABEL: [EXPR, ...]}]}}
    network_maps:  NAME: {src: NETWORK, dst: NETWORK, phi: {X: Y}, Phi: {X: SSUB}, f: SSUB,
                          [w: {X: OPEN}], [u: {Y: OPEN}]}
    hds_maps:      NAME: {map: MAP, source: SYSTEM, target: SYSTEM}
    simulations:   NAME: {system: SYSTEM, init: "MODE:c0,c1,...", [policy], [seed], [t_max],
                          [step], [max_jumps], [integrator]}

Mode labels are the printed form of mode ids: ``off`` or ``(off,pt)``.
Expressions use the coordinate names of the mode they are evaluated on.
"""

from __future__ import annotations

import math
from typing import Any, Callable

import yaml

from .exprlang import ExprError, ExprMap, ParseError
from .geometry import Box, Interval, SmoothFn
from .hyds import HybridDynamicalSystem, hds_product
from .hyph import (Arrow, HybridPhaseSpace, HyPhMap, Path, compose_map, diagonal, identity_map, label,
                   make_path, product_all, product_map, projection, terminal, terminal_map, tuple_map)
from .networks import Network, NetworkMap, closed_system_of, pi_map
from .opensys import (HybridSubmersion, OpenSystem, SSubMap, closed_submersion, crl_product, interconnection,
                      ssub_identity, submersion_product)
from .relations import Branch, Guard, Relation

SECTIONS = ("spaces", "maps", "systems", "submersions", "open_systems", "ssub_maps", "networks",
            "network_maps", "hds_maps", "simulations")


class ConfigError(Exception):
    """Malformed or inconsistent configuration; ``where`` names the offending entry."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
        self.message = message


class _Loader(yaml.SafeLoader):
    """Safe loader where only ``true``/``false`` are booleans (``on``/``off`` stay strings)."""


_Loader.yaml_implicit_resolvers = {
    k: [(tag, rx) for tag, rx in v if tag != "tag:yaml.org,2002:bool"]
    for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:bool",
    __import__("re").compile(r"^(?:true|True|TRUE|false|False|FALSE)$"),
    list("tTfF"),
)


def load_text(text: str) -> dict:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping of sections")
    unknown = set(doc) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(map(str, unknown))}; expected {', '.join(SECTIONS)}")
    return doc


def dump_text(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


def _num(v, where) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {v!r}", where) from None


def _box(defn, where) -> Box:
    if not isinstance(defn, list):
        raise ConfigError("box must be a list of [lo, hi] pairs", where)
    ivs = []
    for k, iv in enumerate(defn):
        if not isinstance(iv, (list, tuple)) or len(iv) != 2:
            raise ConfigError(f"interval {k} must be [lo, hi]", where)
        lo, hi = _num(iv[0], where), _num(iv[1], where)
        if not lo < hi:
            raise ConfigError(f"interval {k} needs lo < hi", where)
        ivs.append(Interval(lo, hi))
    return Box(ivs)


def _exprs(sources, names, dom: Box, cod: Box | None, where: str, lbl: str = "") -> SmoothFn:
    if not isinstance(sources, list):
        sources = [sources]
    try:
        return ExprMap.of(list(names), [str(s) for s in sources]).to_fn(dom, cod, lbl)
    except ParseError as exc:
        raise ConfigError(f"expression error at byte {exc.offset}: {exc}", where) from None
    except ExprError as exc:
        raise ConfigError(f"expression error: {exc}", where) from None


class Config:
    """Lazily resolved configuration document."""

    def __init__(self, doc: dict, source: str = "<config>"):
        self.doc = doc
        self.source = source
        self._memo: dict[tuple[str, str], Any] = {}
        self._active: list[tuple[str, str]] = []

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "Config":
        return cls(load_text(text), source)

    @classmethod
    def from_path(cls, path: str) -> "Config":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), path)

    def names(self, section: str) -> list:
        return list((self.doc.get(section) or {}).keys())

    def _entry(self, section: str, name) -> dict:
        sec = self.doc.get(section) or {}
        if name not in sec:
            # YAML may have typed the key differently (e.g. 1 vs "1")
            for k in sec:
                if str(k) == str(name):
                    name = k
                    break
            else:
                raise ConfigError(f"no entry {name!r} in section {section!r}", f"{section}")
        defn = sec[name]
        if not isinstance(defn, dict):
            raise ConfigError("definition must be a mapping", f"{section}.{name}")
        return defn

    def _get(self, section: str, name, build: Callable[[dict, str], Any]):
        key = (section, str(name))
        if key in self._memo:
            return self._memo[key]
        if key in self._active:
            chain = " -> ".join(f"{s}.{n}" for s, n in self._active + [key])
            raise ConfigError(f"reference cycle: {chain}", f"{section}.{name}")
        self._active.append(key)
        try:
            obj = build(self._entry(section, name), f"{section}.{name}", str(name))
        finally:
            self._active.pop()
        self._memo[key] = obj
        return obj

    # --- spaces ------------------------------------------------------------

    def space(self, name) -> HybridPhaseSpace:
        return self._get("spaces", name, self._build_space)

    def _build_space(self, defn, where, name):
        if "product" in defn:
            return product_all([self.space(n) for n in defn["product"]], name)
        if defn.get("terminal"):
            return terminal()
        modes_spec = defn.get("modes")
        if not isinstance(modes_spec, dict) or not modes_spec:
            raise ConfigError("a space needs a nonempty 'modes' mapping", where)
        modes, coords = {}, {}
        for m, ms in modes_spec.items():
            m = str(m)
            if not isinstance(ms, dict) or "box" not in ms:
                raise ConfigError(f"mode {m!r} needs a 'box'", where)
            modes[m] = _box(ms["box"], f"{where}.modes.{m}")
            coords[m] = [str(c) for c in ms.get("coords", [f"x{i}" for i in range(modes[m].dim)])]
            if len(coords[m]) != modes[m].dim:
                raise ConfigError(f"mode {m!r} lists {len(coords[m])} coords for a {modes[m].dim}-dim box", where)
        arrows = {}
        for aid, aspec in (defn.get("arrows") or {}).items():
            aid = str(aid)
            aw = f"{where}.arrows.{aid}"
            src, dst = str(aspec.get("src")), str(aspec.get("dst"))
            if src not in modes or dst not in modes:
                raise ConfigError(f"unknown endpoint(s) {src!r} -> {dst!r}", aw)
            branches_spec = aspec.get("branches") or [{"guard": aspec.get("guard"), "reset": aspec.get("reset")}]
            branches = []
            for k, bs in enumerate(branches_spec):
                bw = f"{aw}.branches.{k}" if "branches" in aspec else aw
                guard = self._guard(bs.get("guard") or {}, modes[src], coords[src], bw)
                reset = bs.get("reset")
                if reset is None:
                    if modes[src].dim != modes[dst].dim:
                        raise ConfigError("identity reset needs equal dimensions", bw)
                    fn = SmoothFn.identity(modes[src])
                    fn = SmoothFn(modes[src], modes[dst], fn.fn, fn.jac, fn.affine, "id")
                else:
                    fn = _exprs(reset, coords[src], modes[src], modes[dst], f"{bw}.reset")
                    if fn.cod.dim != modes[dst].dim:
                        raise ConfigError("reset has the wrong number of components", bw)
                branches.append(Branch(guard, fn))
            arrows[aid] = Arrow(src, dst, Relation(modes[src], modes[dst], branches))
        try:
            return HybridPhaseSpace(modes, arrows, name, coords)
        except ValueError as exc:
            raise ConfigError(str(exc), where) from None

    @staticmethod
    def _guard(defn, box: Box, coords, where) -> Guard:
        if not isinstance(defn, dict):
            raise ConfigError("guard must map coordinate names to values or [lo, hi]", where)
        pins = {}
        for c, v in defn.items():
            if str(c) not in coords:
                raise ConfigError(f"guard names unknown coordinate {c!r}", where)
            i = coords.index(str(c))
            if isinstance(v, list):
                if len(v) != 2:
                    raise ConfigError(f"guard range for {c!r} must be [lo, hi]", where)
                lo, hi = _num(v[0], where), _num(v[1], where)
                if lo > hi:
                    raise ConfigError(f"guard range for {c!r} is empty", where)
                pins[i] = (lo, hi)
            else:
                pins[i] = _num(v, where)
        g = Guard.pin(box, pins)
        if not g.sub.subset_of(box):
            raise ConfigError("guard leaves the source box", where)
        return g

    # --- maps --------------------------------------------------------------

    def map(self, name) -> HyPhMap:
        return self._get("maps", name, self._build_map)

    def _build_map(self, defn, where, name):
        kind = defn.get("kind", "explicit")
        try:
            if kind == "identity":
                return identity_map(self.space(defn["space"]))
            if kind == "terminal":
                return terminal_map(self.space(defn["space"]))
            if kind == "projection":
                return projection(self.space(defn["space"]), int(defn["factor"]))
            if kind == "diagonal":
                tgt = self.space(defn["target"]) if "target" in defn else None
                return diagonal(self.space(defn["space"]), int(defn.get("n", 2)), tgt)
            if kind in ("pair", "tuple"):
                tgt = self.space(defn["target"]) if "target" in defn else None
                return tuple_map([self.map(m) for m in defn["maps"]], tgt, name=name)
            if kind == "product":
                tgt = self.space(defn["target"]) if "target" in defn else None
                dom = self.space(defn["dom"]) if "dom" in defn else None
                return product_map([self.map(m) for m in defn["maps"]], dom, tgt)
            if kind == "compose":
                ms = [self.map(m) for m in defn["maps"]]
                out = ms[-1]
                for g in reversed(ms[:-1]):
                    out = compose_map(g, out)
                return out
            if kind == "pi":
                return pi_map(defn["phi"], {x: self.map(m) for x, m in defn["Phi"].items()},
                              self.space(defn["src"]), defn["y_index"], defn["x_index"],
                              self.space(defn["target"]), name)
            if kind == "explicit":
                return self._explicit_map(defn, where, name)
        except KeyError as exc:
            raise ConfigError(f"missing or unknown key {exc}", where) from None
        except ValueError as exc:
            raise ConfigError(str(exc), where) from None
        raise ConfigError(f"unknown map kind {kind!r}", where)

    def _explicit_map(self, defn, where, name):
        a, b = self.space(defn["dom"]), self.space(defn["cod"])
        obj, arr, comps = {}, {}, {}
        modes = defn.get("modes") or {}
        for lbl, tgt in modes.items():
            m = a.mode_by_label(str(lbl))
            obj[m] = b.mode_by_label(str(tgt))
        for m in a.modes:
            if m not in obj:
                raise ConfigError(f"no image for mode {label(m)}", where)
        for lbl, path in (defn.get("arrows") or {}).items():
            g = a.arrow_by_label(str(lbl))
            ids = [b.arrow_by_label(str(p)) for p in (path or [])]
            arr[g] = make_path(b, ids, obj[a.arrows[g].src])
        for g in a.arrows:
            if g not in arr:
                raise ConfigError(f"no image path for arrow {label(g)}", where)
        cspec = defn.get("comps") or {}
        for lbl, src in cspec.items():
            m = a.mode_by_label(str(lbl))
            comps[m] = _exprs(src, a.coords[m], a.modes[m], b.modes[obj[m]], f"{where}.comps.{lbl}")
        for m in a.modes:
            if m not in comps:
                raise ConfigError(f"no component for mode {label(m)}", where)
        return HyPhMap(a, b, obj, arr, comps, name)

    # --- systems -----------------------------------------------------------

    def system(self, name) -> HybridDynamicalSystem:
        return self._get("systems", name, self._build_system)

    def _build_system(self, defn, where, name):
        if "product" in defn:
            return hds_product([self.system(n) for n in defn["product"]], name=name)
        if "network" in defn:
            net = self.network(defn["network"])
            w = {x: self.open_system(defn["open_systems"][_key(defn["open_systems"], x, where)])
                 for x in net.index}
            try:
                return closed_system_of(net, w, name)
            except ValueError as exc:
                raise ConfigError(str(exc), where) from None
        a = self.space(defn.get("space", name))
        fspec = defn.get("field") or {}
        field = {}
        for lbl, src in fspec.items():
            m = a.mode_by_label(str(lbl))
            field[m] = _exprs(src, a.coords[m], a.modes[m], Box.real(a.modes[m].dim), f"{where}.field.{lbl}")
        try:
            return HybridDynamicalSystem(a, field, name)
        except ValueError as exc:
            raise ConfigError(str(exc), where) from None

    # --- submersions and open systems --------------------------------------

    def submersion(self, name) -> HybridSubmersion:
        return self._get("submersions", name, self._build_submersion)

    def _build_submersion(self, defn, where, name):
        try:
            if "closed" in defn:
                return closed_submersion(self.space(defn["closed"]))
            if "product" in defn:
                return submersion_product([self.submersion(n) for n in defn["product"]], name)
            return HybridSubmersion(self.space(defn["tot"]), self.space(defn["st"]), self.map(defn["p"]), name)
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}", where) from None
        except ValueError as exc:
            raise ConfigError(str(exc), where) from None

    def open_system(self, name) -> OpenSystem:
        return self._get("open_systems", name, self._build_open)

    def _build_open(self, defn, where, name):
        if "product" in defn:
            return crl_product([self.open_system(n) for n in defn["product"]], name=name)
        s = self.submersion(defn["submersion"])
        F = {}
        for lbl, src in (defn.get("F") or {}).items():
            m = s.tot.mode_by_label(str(lbl))
            F[m] = _exprs(src, s.tot.coords[m], s.tot.modes[m], Box.real(s.state_dim(m)), f"{where}.F.{lbl}")
        return OpenSystem(s, F, name)

    def ssub_map(self, name) -> SSubMap:
        return self._get("ssub_maps", name, self._build_ssub)

    def _build_ssub(self, defn, where, name):
        if "identity" in defn:
            return ssub_identity(self.submersion(defn["identity"]))
        try:
            return SSubMap(self.submersion(defn["dom"]), self.submersion(defn["cod"]),
                           self.map(defn["tot"]), self.map(defn["st"]), name)
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}", where) from None

    # --- networks ----------------------------------------------------------

    def network(self, name) -> Network:
        return self._get("networks", name, self._build_network)

    def _build_network(self, defn, where, name):
        try:
            index = list(defn["index"])
            tau = {x: self.submersion(defn["tau"][_key(defn["tau"], x, where)]) for x in index}
            b = self.submersion(defn["base"])
            net = Network(index, tau, b, name=name)
            ps = defn.get("psi")
            if ps is None:
                return net
            if "components" in ps:
                comps = ps["components"]
                tot = tuple_map([self.map(comps[_key(comps, x, where)]) for x in index], net.prod.tot,
                                b.tot, name="psi")
            else:
                tot = self.map(ps["tot"])
            st = None
            if "st_components" in ps:
                comps = ps["st_components"]
                st = tuple_map([self.map(comps[_key(comps, x, where)]) for x in index], net.prod.st,
                               b.st, name="psi_st")
            elif "st" in ps:
                st = self.map(ps["st"])
            inv = None
            inv_spec = ps.get("st_inverse")
            if inv_spec == "identity":
                inv = {m: SmoothFn.identity(box) for m, box in b.st.modes.items()}
            elif isinstance(inv_spec, dict):
                inv = {}
                for lbl, src in inv_spec.items():
                    m = b.st.mode_by_label(str(lbl))
                    tgt = st.obj[m]
                    inv[m] = _exprs(src, net.prod.st.coords[tgt], net.prod.st.modes[tgt], b.st.modes[m],
                                    f"{where}.psi.st_inverse.{lbl}")
            return net.with_psi(interconnection(b, net.prod, tot, st, inv, name=f"psi[{name}]"))
        except KeyError as exc:
            raise ConfigError(f"missing or unknown key {exc}", where) from None
        except ValueError as exc:
            raise ConfigError(str(exc), where) from None

    def network_map(self, name) -> NetworkMap:
        return self._get("network_maps", name, self._build_network_map)

    def _build_network_map(self, defn, where, name):
        try:
            src, dst = self.network(defn["src"]), self.network(defn["dst"])
            phi = {x: _match(dst.index, defn["phi"][_key(defn["phi"], x, where)]) for x in src.index}
            Phi = {x: self.ssub_map(defn["Phi"][_key(defn["Phi"], x, where)]) for x in src.index}
            return NetworkMap(src, dst, phi, Phi, self.ssub_map(defn["f"]), name)
        except KeyError as exc:
            raise ConfigError(f"missing or unknown key {exc}", where) from None

    def network_map_systems(self, name):
        """The ``w`` (source nodes) and ``u`` (target nodes) open systems declared with a network map."""
        defn = self._entry("network_maps", name)
        nm = self.network_map(name)
        where = f"network_maps.{name}"
        if "w" not in defn or "u" not in defn:
            raise ConfigError("theorem check needs 'w' and 'u' open systems", where)
        w = {x: self.open_system(defn["w"][_key(defn["w"], x, where)]) for x in nm.src.index}
        u = {y: self.open_system(defn["u"][_key(defn["u"], y, where)]) for y in nm.dst.index}
        return w, u

    def hds_map(self, name):
        defn = self._entry("hds_maps", name)
        return self.map(defn["map"]), self.system(defn["source"]), self.system(defn["target"])

    def simulation(self, name) -> dict:
        return dict(self._entry("simulations", name))

    def resolve_all(self) -> list[tuple[str, str, Any]]:
        """Build every declared object; raises ConfigError on the first problem."""
        getters = {"spaces": self.space, "maps": self.map, "systems": self.system,
                   "submersions": self.submersion, "open_systems": self.open_system,
                   "ssub_maps": self.ssub_map, "networks": self.network, "network_maps": self.network_map,
                   "hds_maps": self.hds_map}
        out = []
        for section, get in getters.items():
            for n in self.names(section):
                out.append((section, str(n), get(n)))
        return out


def _key(mapping: dict, x, where):
    if x in mapping:
        return x
    for k in mapping:
        if str(k) == str(x):
            return k
    raise ConfigError(f"no entry for index {x!r}", where)


def _match(index, y):
    for k in index:
        if k == y or str(k) == str(y):
            return k
    return y


def parse_init(text: str, h: HybridDynamicalSystem):
    """``MODE:c0,c1,...`` into an underlying point."""
    from .hyph import UnderlyingPoint

    if ":" not in text:
        raise ConfigError(f"initial state {text!r} must look like MODE:c0,c1,...", "init")
    lbl, _, coords = text.rpartition(":")
    try:
        mode = h.space.mode_by_label(lbl)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), "init") from None
    vals = [_num(v, "init") for v in coords.split(",") if v.strip()] if coords.strip() else []
    if len(vals) != h.space.modes[mode].dim:
        raise ConfigError(f"mode {lbl} needs {h.space.modes[mode].dim} coordinates, got {len(vals)}", "init")
    return UnderlyingPoint(mode, vals)


def _fmt(v: float):
    if math.isinf(v):
        return ".inf" if v > 0 else "-.inf"
    return v


# --- exports of the built-in examples ------------------------------------------

def _thermostat_space() -> dict:
    return {
        "modes": {"off": {"box": [[0.0, 1.0]], "coords": ["x"]},
                  "on": {"box": [[0.0, 1.0]], "coords": ["x"]}},
        "arrows": {"f": {"src": "off", "dst": "on", "guard": {"x": 0.0}, "reset": ["x"]},
                   "g": {"src": "on", "dst": "off", "guard": {"x": 1.0}, "reset": ["x"]}},
    }


def _u_space() -> dict:
    return {"modes": {"pt": {"box": [[float("-inf"), float("inf")]], "coords": ["v"]}}}


def _s_map() -> dict:
    return {"kind": "explicit", "dom": "m", "cod": "u", "modes": {"off": "pt", "on": "pt"},
            "arrows": {"f": [], "g": []}, "comps": {"off": ["x"], "on": ["x"]}}


def _w_system(eps: float) -> dict:
    return {"submersion": "mu", "F": {"(off,pt)": [f"-1 + {eps!r}*v"], "(on,pt)": [f"1 + {eps!r}*v"]}}


def _single_node(doc: dict, eps: float) -> None:
    doc["spaces"].update({"m": _thermostat_space(), "u": _u_space(), "mxu": {"product": ["m", "u"]}})
    doc["maps"].update({
        "s": _s_map(),
        "id_m": {"kind": "identity", "space": "m"},
        "p_mu": {"kind": "projection", "space": "mxu", "factor": 0},
        "id_s": {"kind": "pair", "maps": ["id_m", "s"], "target": "mxu"},
    })
    doc["submersions"].update({"mu": {"tot": "mxu", "st": "m", "p": "p_mu"}, "c": {"closed": "m"}})
    doc["open_systems"]["w"] = _w_system(eps)
    doc["networks"]["loop"] = {
        "index": ["*"], "tau": {"*": "mu"}, "base": "c",
        "psi": {"components": {"*": "id_s"}, "st_components": {"*": "id_m"}, "st_inverse": "identity"},
    }


def _three_node(doc: dict, eps: float) -> None:
    if "m" not in doc["spaces"]:
        doc["spaces"].update({"m": _thermostat_space(), "u": _u_space(), "mxu": {"product": ["m", "u"]}})
        doc["maps"].update({"s": _s_map(), "p_mu": {"kind": "projection", "space": "mxu", "factor": 0}})
        doc["submersions"].update({"mu": {"tot": "mxu", "st": "m", "p": "p_mu"}, "c": {"closed": "m"}})
        doc["open_systems"]["w"] = _w_system(eps)
    doc["spaces"].update({"m3": {"product": ["m", "m", "m"]}, "u3": {"product": ["u", "u", "u"]}})
    doc["maps"]["Pi"] = {"kind": "pi", "src": "m3", "target": "u3", "y_index": [1, 2, 3], "x_index": [1, 2, 3],
                         "phi": {1: 2, 2: 1, 3: 2}, "Phi": {1: "s", 2: "s", 3: "s"}}
    for k in (1, 2, 3):
        doc["maps"][f"pm{k}"] = {"kind": "projection", "space": "m3", "factor": k - 1}
        doc["maps"][f"pu{k}"] = {"kind": "projection", "space": "u3", "factor": k - 1}
        doc["maps"][f"in{k}"] = {"kind": "compose", "maps": [f"pu{k}", "Pi"]}
        doc["maps"][f"slot{k}"] = {"kind": "pair", "maps": [f"pm{k}", f"in{k}"], "target": "mxu"}
    doc["submersions"]["b"] = {"product": ["c", "c", "c"]}
    doc["networks"]["three"] = {
        "index": [1, 2, 3], "tau": {1: "mu", 2: "mu", 3: "mu"}, "base": "b",
        "psi": {"components": {1: "slot1", 2: "slot2", 3: "slot3"}},
    }
    doc["systems"]["three"] = {"network": "three", "open_systems": {1: "w", 2: "w", 3: "w"}}


def export(name: str, eps: float | None = None) -> dict:
    """Config document reproducing a built-in example."""
    from .corpus import DEMOS, EPS

    eps = EPS if eps is None else eps
    doc: dict = {s: {} for s in SECTIONS}
    if name == "thermostat":
        doc["spaces"]["thermostat"] = _thermostat_space()
        doc["systems"]["thermostat"] = {"space": "thermostat", "field": {"off": ["-1"], "on": ["1"]}}
        doc["simulations"]["default"] = {"system": "thermostat", "init": "off:1.0", "policy": "priority",
                                         "seed": 0, "t_max": 10.5, "step": 0.001, "max_jumps": 20}
    elif name == "two-rooms":
        doc["spaces"]["thermostat"] = _thermostat_space()
        doc["spaces"]["two-rooms"] = {"product": ["thermostat", "thermostat"]}
        doc["systems"]["thermostat"] = {"space": "thermostat", "field": {"off": ["-1"], "on": ["1"]}}
        doc["systems"]["two-rooms"] = {"product": ["thermostat", "thermostat"]}
        doc["maps"]["pr1"] = {"kind": "projection", "space": "two-rooms", "factor": 0}
        doc["hds_maps"]["pr1"] = {"map": "pr1", "source": "two-rooms", "target": "thermostat"}
        doc["simulations"]["default"] = {"system": "two-rooms", "init": "(off,off):1.0,0.5", "t_max": 5.0,
                                         "step": 0.001}
    elif name == "product-as-network":
        doc["spaces"].update({"a": _thermostat_space(), "axa": {"product": ["a", "a"]}})
        doc["maps"].update({
            "pr1": {"kind": "projection", "space": "axa", "factor": 0},
            "pr2": {"kind": "projection", "space": "axa", "factor": 1},
            "diag": {"kind": "diagonal", "space": "axa", "n": 2},
        })
        doc["submersions"].update({"t1": {"tot": "axa", "st": "a", "p": "pr1"},
                                   "t2": {"tot": "axa", "st": "a", "p": "pr2"},
                                   "b": {"closed": "axa"}})
        fx = {}
        for i, other in ((1, "x_2"), (2, "x_1")):
            F = {}
            for m1 in ("off", "on"):
                for m2 in ("off", "on"):
                    base = "-1" if (m1, m2)[i - 1] == "off" else "1"
                    F[f"({m1},{m2})"] = [f"{base} + {eps!r}*{other}"]
            fx[i] = F
        doc["open_systems"].update({"X1": {"submersion": "t1", "F": fx[1]},
                                    "X2": {"submersion": "t2", "F": fx[2]}})
        doc["networks"]["net"] = {"index": [1, 2], "tau": {1: "t1", 2: "t2"}, "base": "b",
                                  "psi": {"components": {1: "id_axa", 2: "id_axa"}}}
        doc["maps"]["id_axa"] = {"kind": "identity", "space": "axa"}
        doc["systems"]["closed"] = {"network": "net", "open_systems": {1: "X1", 2: "X2"}}
    elif name == "single-node-loop":
        _single_node(doc, eps)
        doc["systems"]["loop"] = {"network": "loop", "open_systems": {"*": "w"}}
    elif name == "three-node-network":
        _three_node(doc, eps)
        doc["simulations"]["default"] = {"system": "three", "init": "(off,off,off):0.5,0.5,0.5",
                                         "t_max": 5.0, "step": 0.001}
    elif name == "three-node-map":
        _single_node(doc, eps)
        _three_node(doc, eps)
        doc["maps"]["diag3"] = {"kind": "diagonal", "space": "m", "n": 3, "target": "m3"}
        doc["ssub_maps"].update({"diag": {"dom": "c", "cod": "b", "tot": "diag3", "st": "diag3"},
                                 "id_mu": {"identity": "mu"}})
        doc["network_maps"]["map"] = {
            "src": "three", "dst": "loop", "phi": {1: "*", 2: "*", 3: "*"},
            "Phi": {1: "id_mu", 2: "id_mu", 3: "id_mu"}, "f": "diag",
            "w": {1: "w", 2: "w", 3: "w"}, "u": {"*": "w"},
        }
    else:
        raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    return {k: v for k, v in doc.items() if v}


def export_text(name: str) -> str:
    return dump_text(export(name))
