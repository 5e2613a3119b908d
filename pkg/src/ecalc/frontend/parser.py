"""Recursive-descent parser for processes, e-systems and formulas.

Process syntax::

    P ::= P + P | P | P | !P | pre.P | pre | new z1, ..., zn (P) | 0 | (P)
    pre ::= tau | a!x | a?(x)

``.`` binds tighter than ``!``, which binds tighter than ``|``, which binds
tighter than ``+``; operands of ``+`` must be ``0``, prefixed terms or sums of
those.  E-systems are ``[P]@A``, ``G || H`` and ``new z (G)``.

Whether ``a!x`` sends a name or a fact, and whether ``a?(x)`` binds a name or
a fact variable, is decided by the declared atoms and fact variables.

Formula syntax (loosest first): ``<->``, ``->`` (right associative), ``|``,
``&``, then the prefix operators ``~``, ``K[A]``, ``M[A]`` (diamond),
``[recv q B]``, ``[pass q A B]``, ``[am "file" point]`` and their ``<...>``
diamond forms; atoms, ``true``, ``false`` and parentheses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ..epistemics import (
    BOT, TOP, ActionBox, ActionDiamond, And, Atom as FAtom, Box, Diamond, Iff, Implies,
    Not, Or, PointedActionModel, interact_model, receive_model,
)
from ..terms import (
    Act, AgentProc, EPar, ERes, InFact, InName, Nil, OutFact, OutName, Par, Repl, Res,
    Sum, Tau, is_reserved, is_sum_form,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"

    def contains(self, other: "SourceSpan") -> bool:
        return ((self.line, self.column) <= (other.line, other.column)
                and (other.end_line, other.end_column) <= (self.end_line, self.end_column))


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Declarations:
    """Identifier universes the parser resolves against.

    ``None`` for ``names`` or ``agents`` means "accept anything"; atoms and
    fact variables are always explicit because they change how terms parse.
    """
    atoms: frozenset = frozenset()
    fact_vars: frozenset = frozenset()
    names: Optional[frozenset] = None
    agents: Optional[frozenset] = None
    allow_reserved: bool = False

    def __post_init__(self):
        for f in ("atoms", "fact_vars"):
            object.__setattr__(self, f, frozenset(getattr(self, f)))
        for f in ("names", "agents"):
            v = getattr(self, f)
            if v is not None:
                object.__setattr__(self, f, frozenset(v))


# -- lexer --------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<op><->|->|\|\||[!?().,|+\[\]@~&<>])
  | (?P<num>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str      # "op", "num", "id", "str", "eof"
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            span = SourceSpan(file, line, col, line, col + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        s = m.group(0)
        nl = s.count("\n")
        end_line = line + nl
        end_col = (len(s) - s.rfind("\n")) if nl else col + len(s)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, s, line, col, end_line, end_col))
        pos, line, col = m.end(), end_line, end_col
    tokens.append(Token("eof", "", line, col, line, col))
    return tokens


# -- shared cursor ------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, decl: Declarations, file: str,
                 load_action: Optional[Callable[[str, str], PointedActionModel]] = None):
        self.toks = tokenize(text, file)
        self.i = 0
        self.decl = decl
        self.file = file
        self.spans: dict = {}
        self.load_action = load_action

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def span_of(self, t: Token) -> SourceSpan:
        return SourceSpan(self.file, t.line, t.col, t.end_line, t.end_col)

    def fail(self, msg: str, t: Optional[Token] = None):
        raise ParseError(msg, self.span_of(t or self.tok))

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str) -> Token:
        t = self.tok
        if t.kind != "id":
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        if is_reserved(t.text) and not self.decl.allow_reserved:
            self.fail(f"{t.text!r} is reserved for generated names")
        self.i += 1
        return t

    def mark(self, node, start: Token):
        end = self.toks[self.i - 1]
        self.spans[id(node)] = (node, SourceSpan(self.file, start.line, start.col,
                                                 end.end_line, end.end_col))
        return node

    def finish(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")

    # -- processes --------------------------------------------------------

    def process(self, env):
        start = self.tok
        first = self.parallel(env)
        if not self.at("+"):
            return first
        operands = [(first, start)]
        while self.at("+"):
            self.i += 1
            tok = self.tok
            operands.append((self.parallel(env), tok))
        for node, tok in operands:
            if not is_sum_form(node):
                self.fail("operands of '+' must be 0, prefixed terms or sums of those", tok)
        out = operands[0][0]
        for node, _ in operands[1:]:
            out = self.mark(Sum(out, node), start)
        return out

    def parallel(self, env):
        start = self.tok
        out = self.unary(env)
        while self.at("|"):
            self.i += 1
            out = self.mark(Par(out, self.unary(env)), start)
        return out

    def unary(self, env):
        start = self.tok
        if self.at("!"):
            self.i += 1
            return self.mark(Repl(self.unary(env)), start)
        if self.at("("):
            self.i += 1
            p = self.process(env)
            self.expect(")")
            return p
        if start.kind == "num":
            if start.text != "0":
                self.fail("only '0' is a process constant")
            self.i += 1
            return self.mark(Nil(), start)
        if self.at("new"):
            return self.restriction(env, self.process, Res)
        if self.at("tau") or start.kind == "id":
            prefix, inner = self.prefix(env)
            if self.at("."):
                self.i += 1
                body = self.unary(inner)
            else:
                body = self.mark(Nil(), self.toks[self.i - 1])
            return self.mark(Act(prefix, body), start)
        self.fail(f"expected a process, found {start.text or 'end of input'!r}")

    def restriction(self, env, body_parser, ctor):
        start = self.expect("new")
        binders = [self.ident("a name")]
        while self.at(","):
            self.i += 1
            binders.append(self.ident("a name"))
        inner = env
        for b in binders:
            self._check_name_binder(b)
            inner = self._bind_name(inner, b.text)
        self.expect("(")
        body = body_parser(inner)
        self.expect(")")
        for b in reversed(binders):
            body = self.mark(ctor(b.text, body), start)
        return body

    def _check_name_binder(self, t: Token):
        if t.text in self.decl.atoms or t.text in self.decl.fact_vars:
            self.fail(f"{t.text!r} is declared as a fact and cannot bind a name", t)

    @staticmethod
    def _bind_name(env, name):
        names, facts = env
        return names | {name}, facts - {name}

    def _name_use(self, t: Token, env):
        names, facts = env
        if t.text in facts or t.text in self.decl.atoms:
            self.fail(f"{t.text!r} is a fact, a channel name is needed here", t)
        if t.text in self.decl.fact_vars:
            self.fail(f"fact variable {t.text!r} used as a name", t)
        if (self.decl.names is not None and t.text not in names
                and t.text not in self.decl.names):
            self.fail(f"undeclared name {t.text!r}", t)
        return t.text

    def prefix(self, env):
        start = self.tok
        if self.at("tau"):
            self.i += 1
            return self.mark(Tau(), start), env
        ch_tok = self.ident("a channel name")
        ch = self._name_use(ch_tok, env)
        if self.at("!"):
            self.i += 1
            pay = self.ident("a name or fact")
            names, facts = env
            if pay.text in facts or (pay.text in self.decl.atoms and pay.text not in names):
                return self.mark(OutFact(ch, pay.text), start), env
            if pay.text in self.decl.fact_vars:
                self.fail(f"fact variable {pay.text!r} is not bound here", pay)
            return self.mark(OutName(ch, self._name_use(pay, env)), start), env
        if self.at("?"):
            self.i += 1
            self.expect("(")
            b = self.ident("a binder")
            self.expect(")")
            names, facts = env
            if b.text in self.decl.fact_vars:
                return self.mark(InFact(ch, b.text), start), (names - {b.text}, facts | {b.text})
            if b.text in self.decl.atoms:
                self.fail(f"atom {b.text!r} cannot be an input binder; declare a fact variable", b)
            return self.mark(InName(ch, b.text), start), self._bind_name(env, b.text)
        self.fail(f"expected '!' or '?' after channel {ch!r}")

    # -- e-systems --------------------------------------------------------

    def system(self, env):
        start = self.tok
        out = self.sys_unary(env)
        while self.at("||"):
            self.i += 1
            out = self.mark(EPar(out, self.sys_unary(env)), start)
        return out

    def sys_unary(self, env):
        start = self.tok
        if self.at("new"):
            return self.restriction(env, self.system, ERes)
        if self.at("("):
            self.i += 1
            g = self.system(env)
            self.expect(")")
            return g
        if self.at("["):
            self.i += 1
            p = self.process(env)
            self.expect("]")
            self.expect("@")
            a = self.ident("an agent")
            if self.decl.agents is not None and a.text not in self.decl.agents:
                self.fail(f"undeclared agent {a.text!r}", a)
            if a.text in self.agents_seen:
                self.fail(f"agent {a.text!r} occurs more than once", a)
            self.agents_seen.add(a.text)
            return self.mark(AgentProc(a.text, p), start)
        self.fail(f"expected an e-system, found {start.text or 'end of input'!r}")

    # -- formulas ---------------------------------------------------------

    def formula(self):
        start = self.tok
        left = self.implication()
        while self.at("<->"):
            self.i += 1
            left = self.mark(Iff(left, self.implication()), start)
        return left

    def implication(self):
        start = self.tok
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return self.mark(Implies(left, self.implication()), start)
        return left

    def disjunction(self):
        start = self.tok
        left = self.conjunction()
        while self.at("|"):
            self.i += 1
            left = self.mark(Or(left, self.conjunction()), start)
        return left

    def conjunction(self):
        start = self.tok
        left = self.f_unary()
        while self.at("&"):
            self.i += 1
            left = self.mark(And(left, self.f_unary()), start)
        return left

    def f_agent(self):
        t = self.ident("an agent")
        if self.decl.agents is not None and t.text not in self.decl.agents:
            self.fail(f"undeclared agent {t.text!r}", t)
        return t.text

    def f_atom(self):
        t = self.ident("an atom")
        if t.text not in self.decl.atoms:
            self.fail(f"undeclared atom {t.text!r}", t)
        return t.text

    def f_unary(self):
        start = self.tok
        if self.at("~"):
            self.i += 1
            return self.mark(Not(self.f_unary()), start)
        if start.kind == "id" and start.text in ("K", "M") and self.peek().text == "[":
            self.i += 2
            agent = self.f_agent()
            self.expect("]")
            sub = self.f_unary()
            node = Box(agent, sub) if start.text == "K" else Diamond(agent, sub)
            return self.mark(node, start)
        if self.at("[") or self.at("<"):
            diamond = self.at("<")
            self.i += 1
            action = self.action()
            self.expect(">" if diamond else "]")
            sub = self.f_unary()
            node = ActionDiamond(action, sub) if diamond else ActionBox(action, sub)
            return self.mark(node, start)
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if self.at("true"):
            self.i += 1
            return TOP
        if self.at("false"):
            self.i += 1
            return BOT
        if start.kind == "id":
            return self.mark(FAtom(self.f_atom()), start)
        self.fail(f"expected a formula, found {start.text or 'end of input'!r}")

    def action(self) -> PointedActionModel:
        t = self.tok
        agents = sorted(self.decl.agents) if self.decl.agents is not None else None
        if self.at("recv"):
            self.i += 1
            q, b = self.f_atom(), self.f_agent()
            if agents is None:
                self.fail("action modalities need the agent universe to be declared", t)
            return receive_model(q, b, agents)
        if self.at("pass"):
            self.i += 1
            q, a, b = self.f_atom(), self.f_agent(), self.f_agent()
            if agents is None:
                self.fail("action modalities need the agent universe to be declared", t)
            if a == b:
                self.fail("pass needs two distinct agents", t)
            return interact_model(q, a, b, agents)
        if self.at("am"):
            self.i += 1
            s = self.tok
            if s.kind != "str":
                self.fail("expected a quoted file name")
            self.i += 1
            p = self.tok
            if p.kind not in ("id", "num"):
                self.fail("expected an action point")
            self.i += 1
            if self.load_action is None:
                self.fail("no action model loader available here", s)
            try:
                return self.load_action(s.text[1:-1], p.text)
            except (OSError, ValueError) as exc:
                self.fail(f"cannot load action model: {exc}", s)
        self.fail("expected 'recv', 'pass' or 'am'")


# -- entry points -------------------------------------------------------------

def _children(node):
    if isinstance(node, Act):
        return [node.body]
    if isinstance(node, (Sum, Par, EPar, And)):
        return [node.left, node.right]
    if isinstance(node, (Res, ERes, Repl)):
        return [node.body]
    if isinstance(node, AgentProc):
        return [node.control]
    if isinstance(node, Not):
        return [node.sub]
    if isinstance(node, (Box, ActionBox)):
        return [node.sub]
    return []


def _path_spans(root, raw: dict) -> dict:
    out = {}
    stack = [(root, ())]
    while stack:
        node, path = stack.pop()
        hit = raw.get(id(node))
        if hit is not None and hit[0] is node:
            out[path] = hit[1]
        for i, child in enumerate(_children(node)):
            stack.append((child, path + (i,)))
    return out


_NO_ENV = (frozenset(), frozenset())


def parse_process_with_spans(text: str, decl: Declarations = Declarations(), file: str = "<input>"):
    """Parse a process; also return spans keyed by child-index paths."""
    p = _Parser(text, decl, file)
    node = p.process(_NO_ENV)
    p.finish()
    return node, _path_spans(node, p.spans)


def parse_process(text: str, decl: Declarations = Declarations(), file: str = "<input>"):
    return parse_process_with_spans(text, decl, file)[0]


def parse_esystem_with_spans(text: str, decl: Declarations = Declarations(), file: str = "<input>"):
    p = _Parser(text, decl, file)
    p.agents_seen = set()
    node = p.system(_NO_ENV)
    p.finish()
    return node, _path_spans(node, p.spans)


def parse_esystem(text: str, decl: Declarations = Declarations(), file: str = "<input>"):
    return parse_esystem_with_spans(text, decl, file)[0]


def parse_formula_with_spans(text: str, decl: Declarations = Declarations(), file: str = "<input>",
                             load_action: Optional[Callable[[str, str], PointedActionModel]] = None):
    p = _Parser(text, decl, file, load_action)
    node = p.formula()
    p.finish()
    return node, _path_spans(node, p.spans)


def parse_formula(text: str, decl: Declarations = Declarations(), file: str = "<input>",
                  load_action: Optional[Callable[[str, str], PointedActionModel]] = None):
    return parse_formula_with_spans(text, decl, file, load_action)[0]


def declarations_for(atoms: Iterable[str] = (), agents: Optional[Iterable[str]] = None,
                     fact_vars: Iterable[str] = (), names: Optional[Iterable[str]] = None,
                     allow_reserved: bool = False) -> Declarations:
    return Declarations(frozenset(atoms), frozenset(fact_vars),
                        None if names is None else frozenset(names),
                        None if agents is None else frozenset(agents), allow_reserved)
