"""Recursive-descent parser producing :mod:`seni.ast` trees.

Grammar sketch::

    program   ::= (import | system)*
    import    ::= "import" IDENT ";"
    system    ::= "system" IDENT ("refines" IDENT)? "{" member* "}"
    member    ::= record | statevar | instvar | action | init | spec | prop | property | func
    spec-expr ::= par;   par ::= choice ("||" choice)*;   choice ::= seq ("|" seq)*
                  seq ::= unary ("." unary)*;   unary ::= "always" unary | atom
    expr      ::= implies;  implies ::= or ("=>" implies)?;  or ::= and ("|" and)*
                  and ::= not ("&" not)*;   not ::= "!" not | "always" implies | cmp
                  cmp ::= add (relop add)?; add ::= mul (("+"|"-") mul)*
                  mul ::= neg (("*"|"/"|"mod") neg)*;   neg ::= "-" neg | cast
                  cast ::= "(" TYPE ")" neg | postfix

The first error aborts parsing.
"""

from __future__ import annotations

from typing import Optional

from seni import ast as A
from seni.errors import ParseError, Span
from seni.lexer import Token, TokenKind as K, string_value, tokenize

_EXPR_START = ("integer", "string", "true", "false", "null", "@", "identifier", "(", "{", "!",
               "-", "if", "always")


class Parser:
    def __init__(self, tokens: list[Token], file: Optional[str] = None):
        self.tokens = list(tokens)
        end = tokens[-1].offset + len(tokens[-1].lexeme) if tokens else 0
        line = tokens[-1].line if tokens else 1
        col = tokens[-1].col + len(tokens[-1].lexeme) if tokens else 1
        self.tokens.append(Token(K.EOF, "", line, col, end))
        self.pos = 0
        self.file = file

    # -- token helpers ----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind is not K.EOF:
            self.pos += 1
        return tok

    def at(self, kind: K, lexeme: Optional[str] = None) -> bool:
        tok = self.cur
        return tok.kind is kind and (lexeme is None or tok.lexeme == lexeme)

    def at_kw(self, word: str) -> bool:
        return self.at(K.KEYWORD, word)

    def accept(self, kind: K, lexeme: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, lexeme):
            return self.advance()
        return None

    def tok_span(self, tok: Token) -> Span:
        return Span(tok.offset, tok.offset + len(tok.lexeme), tok.line, tok.col, self.file)

    def span_from(self, start: Token) -> Span:
        last = self.prev if self.pos > 0 else start
        end = max(last.offset + len(last.lexeme), start.offset + len(start.lexeme))
        return Span(start.offset, end, start.line, start.col, self.file)

    def error(self, expected: tuple[str, ...], what: Optional[str] = None) -> ParseError:
        tok = self.cur
        found = "end of input" if tok.kind is K.EOF else repr(tok.lexeme)
        exp = " or ".join(f"'{e}'" if len(e) <= 2 or e in ("always", "null") else e
                          for e in expected)
        msg = f"expected {what or exp}, found {found}"
        return ParseError(msg, self.tok_span(tok), expected)

    def expect(self, kind: K, lexeme: Optional[str] = None) -> Token:
        if self.at(kind, lexeme):
            return self.advance()
        raise self.error((lexeme or kind.value,))

    def expect_ident(self) -> Token:
        return self.expect(K.IDENT)

    # -- program structure ---------------------------------------------------

    def parse_program(self) -> A.ProgramAst:
        imports: list[A.ImportDecl] = []
        systems: list[A.SystemAst] = []
        seen: set[str] = set()
        while not self.at(K.EOF):
            if self.at_kw("import"):
                start = self.advance()
                name = self.expect_ident()
                self.expect(K.SEMI)
                if name.lexeme in seen:
                    raise ParseError(f"duplicate import of '{name.lexeme}'", self.tok_span(name),
                                     ())
                seen.add(name.lexeme)
                imports.append(A.ImportDecl(name.lexeme, self.span_from(start)))
            elif self.at_kw("system"):
                systems.append(self.parse_system())
            else:
                raise self.error(("import", "system"))
        return A.ProgramAst(tuple(imports), tuple(systems), self.file)

    def parse_system(self) -> A.SystemAst:
        start = self.expect(K.KEYWORD, "system")
        name = self.expect_ident().lexeme
        refines = None
        if self.accept(K.KEYWORD, "refines"):
            refines = self.expect_ident().lexeme
        self.expect(K.LBRACE)
        parts: dict[str, list] = {k: [] for k in (
            "records", "state_vars", "instance_vars", "actions", "specs", "props",
            "static_props", "funcs")}
        init = None
        while not self.accept(K.RBRACE):
            tok = self.cur
            if self.at_kw("record"):
                parts["records"].append(self.parse_record())
            elif self.at_kw("state"):
                parts["state_vars"].append(self.parse_state_var())
            elif self.at_kw("action"):
                parts["actions"].append(self.parse_action())
            elif self.at_kw("init"):
                if init is not None:
                    raise ParseError("duplicate 'init' declaration", self.tok_span(tok), ())
                init = self.parse_init()
            elif self.at_kw("spec"):
                parts["specs"].append(self.parse_spec_decl())
            elif self.at_kw("prop"):
                parts["props"].append(self.parse_prop())
            elif self.at_kw("static") or self.at_kw("property"):
                parts["static_props"].append(self.parse_property())
            elif self.at_kw("func"):
                parts["funcs"].append(self.parse_func())
            elif self.at(K.TYPE) or self.at(K.IDENT) or self.at(K.LBRACKET):
                parts["instance_vars"].append(self.parse_instance_var())
            else:
                raise self.error(("}", "record", "state", "action", "init", "spec", "prop",
                                  "property", "func"), "a system member or '}'")
        return A.SystemAst(name, refines, init=init, span=self.span_from(start),
                           **{k: tuple(v) for k, v in parts.items()})

    def parse_type(self) -> A.TypeExpr:
        start = self.cur
        if self.accept(K.LBRACKET):
            elem = self.parse_type()
            self.expect(K.RBRACKET)
            return A.TypeExpr(elem=elem, span=self.span_from(start))
        if self.at(K.TYPE) or self.at(K.IDENT):
            tok = self.advance()
            return A.TypeExpr(tok.lexeme, span=self.tok_span(tok))
        raise self.error(("type",), "a type")

    def parse_record(self) -> A.RecordDecl:
        start = self.advance()
        name = self.expect_ident().lexeme
        self.expect(K.LBRACE)
        fields = []
        while not self.at(K.RBRACE):
            fstart = self.cur
            ftype = self.parse_type()
            fname = self.expect_ident().lexeme
            default = self.parse_expr() if self.accept(K.COLON) else None
            fields.append(A.RecordField(fname, ftype, default, self.span_from(fstart)))
            if not (self.accept(K.COMMA) or self.accept(K.SEMI)):
                break
        self.expect(K.RBRACE)
        return A.RecordDecl(name, tuple(fields), self.span_from(start))

    def parse_state_var(self) -> A.StateVarDecl:
        start = self.advance()
        vtype = self.parse_type()
        name = self.expect_ident().lexeme
        default = self.parse_expr() if self.accept(K.COLON) else None
        self.expect(K.SEMI)
        return A.StateVarDecl(name, vtype, default, self.span_from(start))

    def parse_instance_var(self) -> A.InstanceVarDecl:
        start = self.cur
        vtype = self.parse_type()
        name = self.expect_ident().lexeme
        self.expect(K.SEMI)
        return A.InstanceVarDecl(name, vtype, self.span_from(start))

    def parse_action(self) -> A.ActionDecl:
        start = self.advance()
        name = self.expect_ident().lexeme
        body = self.parse_block()
        return A.ActionDecl(name, body, self.span_from(start))

    def parse_init(self) -> A.InitDecl:
        start = self.advance()
        self.expect(K.LPAREN)
        params = []
        if not self.at(K.RPAREN):
            while True:
                pstart = self.cur
                ptype = self.parse_type()
                pname = self.expect_ident().lexeme
                params.append(A.Param(pname, ptype, self.span_from(pstart)))
                if not self.accept(K.COMMA):
                    break
        self.expect(K.RPAREN)
        body = self.parse_block()
        return A.InitDecl(tuple(params), body, self.span_from(start))

    def parse_block(self) -> tuple[A.Assign, ...]:
        self.expect(K.LBRACE)
        stmts = []
        while not self.accept(K.RBRACE):
            stmts.append(self.parse_statement())
        return tuple(stmts)

    def _is_statement_start(self) -> bool:
        if self.at(K.IDENT):
            return self.peek().kind is K.COLON
        if not self.at(K.AT):
            return False
        k = 1
        while self.peek(k).kind is K.DOT and self.peek(k + 1).kind is K.IDENT:
            k += 2
        return self.peek(k).kind is K.COLON

    def parse_statement(self) -> A.Assign:
        start = self.cur
        if self.accept(K.AT):
            path = []
            while self.accept(K.DOT):
                path.append(self.expect_ident().lexeme)
            if not path:
                raise self.error((".",))
            to_state = True
        elif self.at(K.IDENT):
            path = [self.advance().lexeme]
            to_state = False
        else:
            raise self.error(("@", "identifier", "}"), "a statement or '}'")
        self.expect(K.COLON)
        value = self.parse_expr()
        # ';' may be dropped before '}' and after a braced record literal
        if not self.accept(K.SEMI):
            if not (self.at(K.RBRACE) or self.prev.kind is K.RBRACE):
                raise self.error((";",))
        return A.Assign(tuple(path), value, to_state, self.span_from(start))

    def parse_spec_decl(self) -> A.SpecDecl:
        start = self.advance()
        name = self.expect_ident().lexeme
        self.expect(K.LBRACE)
        body = self.parse_spec_expr()
        self.expect(K.RBRACE)
        return A.SpecDecl(name, body, self.span_from(start))

    def parse_prop(self) -> A.PropDecl:
        start = self.advance()
        name = self.expect_ident().lexeme
        self.expect(K.LBRACE)
        body = self.parse_expr()
        self.expect(K.RBRACE)
        return A.PropDecl(name, body, self.span_from(start))

    def parse_property(self) -> A.PropertyDecl:
        start = self.cur
        static = bool(self.accept(K.KEYWORD, "static"))
        self.expect(K.KEYWORD, "property")
        name = self.expect_ident().lexeme
        self.expect(K.LBRACE)
        body = self.parse_expr()
        self.expect(K.RBRACE)
        return A.PropertyDecl(name, body, static, self.span_from(start))

    def parse_func(self) -> A.FuncDecl:
        start = self.advance()
        name = self.expect_ident().lexeme
        params: list[str] = []
        if self.accept(K.LPAREN):
            if not self.at(K.RPAREN):
                params.append(self.expect_ident().lexeme)
                while self.accept(K.COMMA):
                    params.append(self.expect_ident().lexeme)
            self.expect(K.RPAREN)
        self.expect(K.DOUBLE_COLON)
        sig = [self.parse_type()]
        while self.accept(K.ARROW):
            sig.append(self.parse_type())
        self.expect(K.LBRACE)
        stmts = []
        while self._is_statement_start():
            stmts.append(self.parse_statement())
        result = self.parse_expr()
        self.expect(K.RBRACE)
        return A.FuncDecl(name, tuple(params), tuple(sig), tuple(stmts), result,
                          self.span_from(start))

    # -- specification expressions -------------------------------------------

    def parse_spec_expr(self) -> A.SpecExpr:
        start = self.cur
        left = self.parse_spec_choice()
        while self.accept(K.PAR):
            right = self.parse_spec_choice()
            left = A.SpecPar(left, right, self.span_from(start))
        return left

    def parse_spec_choice(self) -> A.SpecExpr:
        start = self.cur
        left = self.parse_spec_seq()
        while self.accept(K.BAR):
            right = self.parse_spec_seq()
            left = A.SpecChoice(left, right, self.span_from(start))
        return left

    def parse_spec_seq(self) -> A.SpecExpr:
        start = self.cur
        left = self.parse_spec_unary()
        while self.accept(K.DOT):
            right = self.parse_spec_unary()
            left = A.SpecSeq(left, right, self.span_from(start))
        return left

    def parse_spec_unary(self) -> A.SpecExpr:
        start = self.cur
        if self.accept(K.KEYWORD, "always"):
            body = self.parse_spec_unary()
            return A.SpecAlways(body, self.span_from(start))
        if self.accept(K.LPAREN):
            inner = self.parse_spec_expr()
            self.expect(K.RPAREN)
            return inner
        if self.at(K.IDENT):
            tok = self.advance()
            if tok.lexeme == "fold" and self.accept(K.LPAREN):
                self.expect(K.PAR)
                self.expect(K.COMMA)
                coll = self.expect_ident().lexeme
                self.expect(K.RPAREN)
                return A.SpecFold(coll, self.span_from(start))
            return A.SpecAtom(tok.lexeme, self.tok_span(tok))
        raise self.error(("identifier", "(", "always"), "an action, spec, 'always' or '('")

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        return self.parse_implies()

    def parse_implies(self) -> A.Expr:
        start = self.cur
        left = self.parse_or()
        if self.accept(K.IMPLIES):
            right = self.parse_implies()
            return A.Binary("=>", left, right, self.span_from(start))
        return left

    def parse_or(self) -> A.Expr:
        start = self.cur
        left = self.parse_and()
        while self.accept(K.BAR):
            right = self.parse_and()
            left = A.Binary("|", left, right, self.span_from(start))
        return left

    def parse_and(self) -> A.Expr:
        start = self.cur
        left = self.parse_not()
        while self.accept(K.AMP):
            right = self.parse_not()
            left = A.Binary("&", left, right, self.span_from(start))
        return left

    def parse_not(self) -> A.Expr:
        start = self.cur
        if self.accept(K.BANG):
            return A.Unary("!", self.parse_not(), self.span_from(start))
        if self.accept(K.KEYWORD, "always"):
            return A.Unary("always", self.parse_implies(), self.span_from(start))
        return self.parse_cmp()

    _RELOPS = {K.EQ: "=", K.NEQ: "/=", K.LT: "<", K.LE: "<=", K.GT: ">", K.GE: ">="}

    def parse_cmp(self) -> A.Expr:
        start = self.cur
        left = self.parse_add()
        op = self._RELOPS.get(self.cur.kind)
        if op is not None:
            self.advance()
            right = self.parse_add()
            return A.Binary(op, left, right, self.span_from(start))
        return left

    def parse_add(self) -> A.Expr:
        start = self.cur
        left = self.parse_mul()
        while self.at(K.PLUS) or self.at(K.MINUS):
            op = self.advance().lexeme
            right = self.parse_mul()
            left = A.Binary(op, left, right, self.span_from(start))
        return left

    def parse_mul(self) -> A.Expr:
        start = self.cur
        left = self.parse_neg()
        while self.at(K.STAR) or self.at(K.SLASH) or self.at_kw("mod"):
            op = self.advance().lexeme
            right = self.parse_neg()
            left = A.Binary(op, left, right, self.span_from(start))
        return left

    def parse_neg(self) -> A.Expr:
        start = self.cur
        if self.accept(K.MINUS):
            operand = self.parse_neg()
            if isinstance(operand, A.IntLit) and operand.span and operand.span.start == \
                    start.offset + 1:
                return A.IntLit(-operand.value, self.span_from(start))
            return A.Unary("-", operand, self.span_from(start))
        if self.at(K.LPAREN) and self.peek().kind is K.TYPE and self.peek(2).kind is K.RPAREN:
            self.advance()
            to = self.parse_type()
            self.expect(K.RPAREN)
            operand = self.parse_neg()
            return A.Cast(to, operand, self.span_from(start))
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        start = self.cur
        expr = self.parse_primary()
        while True:
            if self.accept(K.DOT):
                name = self.expect_ident().lexeme
                expr = A.Field(expr, name, self.span_from(start))
            elif self.accept(K.LBRACKET):
                index = self.parse_expr()
                self.expect(K.RBRACKET)
                expr = A.Index(expr, index, self.span_from(start))
            else:
                return expr

    def parse_primary(self) -> A.Expr:
        tok = self.cur
        if self.accept(K.INT):
            return A.IntLit(int(tok.lexeme), self.tok_span(tok))
        if self.accept(K.STRING):
            return A.StrLit(string_value(tok.lexeme), self.tok_span(tok))
        if self.accept(K.KEYWORD, "true"):
            return A.BoolLit(True, self.tok_span(tok))
        if self.accept(K.KEYWORD, "false"):
            return A.BoolLit(False, self.tok_span(tok))
        if self.accept(K.KEYWORD, "null"):
            return A.NullLit(self.tok_span(tok))
        if self.accept(K.AT):
            return A.At(self.tok_span(tok))
        if self.accept(K.KEYWORD, "if"):
            cond = self.parse_expr()
            self.expect(K.KEYWORD, "then")
            then = self.parse_expr()
            self.expect(K.KEYWORD, "else")
            orelse = self.parse_expr()
            return A.If(cond, then, orelse, self.span_from(tok))
        if self.accept(K.LPAREN):
            inner = self.parse_expr()
            self.expect(K.RPAREN)
            return inner
        if self.at(K.LBRACE):
            return self.parse_record_lit()
        if self.at(K.IDENT):
            self.advance()
            if self.accept(K.DOUBLE_COLON):
                system = self.expect_ident().lexeme
                return A.InstanceCtor(tok.lexeme, system, self.span_from(tok))
            if self.at(K.LPAREN):
                if tok.lexeme == "fold":
                    return self.parse_fold(tok)
                self.advance()
                args = []
                if not self.at(K.RPAREN):
                    args.append(self.parse_expr())
                    while self.accept(K.COMMA):
                        args.append(self.parse_expr())
                self.expect(K.RPAREN)
                return A.Call(tok.lexeme, tuple(args), self.span_from(tok))
            return A.Name(tok.lexeme, self.tok_span(tok))
        raise self.error(_EXPR_START, "an expression")

    def parse_fold(self, start: Token) -> A.Fold:
        self.expect(K.LPAREN)
        if self.at(K.AMP) or self.at(K.BAR):
            op = self.advance().lexeme
        else:
            raise self.error(("&", "|"))
        self.expect(K.COMMA)
        coll = self.expect_ident().lexeme
        self.expect(K.DOT)
        prop = self.expect_ident().lexeme
        self.expect(K.RPAREN)
        return A.Fold(op, coll, prop, self.span_from(start))

    def parse_record_lit(self) -> A.RecordLit:
        start = self.expect(K.LBRACE)
        fields = []
        while not self.at(K.RBRACE):
            name = self.expect_ident().lexeme
            self.expect(K.COLON)
            fields.append((name, self.parse_expr()))
            if not (self.accept(K.SEMI) or self.accept(K.COMMA)):
                break
        self.expect(K.RBRACE)
        return A.RecordLit(tuple(fields), span=self.span_from(start))


def parse(tokens: list[Token], file: Optional[str] = None) -> A.ProgramAst:
    return Parser(tokens, file).parse_program()


def parse_source(source: str, file: Optional[str] = None) -> A.ProgramAst:
    return parse(tokenize(source, file), file)


def parse_expression(text: str, file: Optional[str] = None) -> A.Expr:
    """Parse a standalone expression (used for formulas given on the command line)."""
    p = Parser(tokenize(text, file), file)
    expr = p.parse_expr()
    p.expect(K.EOF)
    return expr


def parse_spec_expression(text: str) -> A.SpecExpr:
    p = Parser(tokenize(text))
    expr = p.parse_spec_expr()
    p.expect(K.EOF)
    return expr
