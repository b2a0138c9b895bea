"""Hand-written tokenizer and recursive-descent parser for the query dialect.

Grammar (keywords case-insensitive, identifiers case-sensitive):

    query  := SELECT select_list FROM name (JOIN name ON colref = colref)*
              (WHERE expr)? (GROUP BY colref (, colref)* (WITH (ROLLUP|CUBE))?)?
              (ORDER BY colref (ASC|DESC)? (, ...)*)? (LIMIT int)?
    select_list := * | expr (AS name)? (, expr (AS name)?)*

Expressions support + - * /, comparisons, AND/OR/NOT, single-quoted strings,
TRUE/FALSE, and COUNT/SUM/AVG/MIN/MAX calls (COUNT may take *).

Every failure raises SqlSyntaxError with a 1-based line/column position; the
parser never crashes on arbitrary input.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import SqlSyntaxError
from ..expr import AGG_FUNCS, Aggregate, Arith, ColumnRef, Compare, Expression, Literal, Logic
from ..model import INT64_MAX, INT64_MIN
from .ast import GroupMode, JoinClause, OrderItem, Query, SelectItem

_KEYWORDS = {
    "SELECT", "FROM", "JOIN", "ON", "WHERE", "GROUP", "BY", "WITH", "ROLLUP",
    "CUBE", "ORDER", "ASC", "DESC", "LIMIT", "AND", "OR", "NOT", "AS",
    "TRUE", "FALSE",
}
_SYMBOLS = ("<=", ">=", "<>", "(", ")", ",", ".", "*", "=", "<", ">", "+", "-", "/")


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD | IDENT | INT | FLOAT | STRING | SYMBOL | EOF
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(text)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        start_line, start_col = line, col
        if ch == "'":
            # Single-quoted string; '' is an escaped quote.
            j = i + 1
            chunks = []
            while True:
                if j >= n:
                    raise SqlSyntaxError("unterminated string literal", start_line, start_col, "'")
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        chunks.append("'")
                        j += 2
                        continue
                    break
                chunks.append(text[j])
                j += 1
            tokens.append(Token("STRING", "".join(chunks), start_line, start_col))
            advance(j + 1 - i)
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            is_float = False
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            word = text[i:j]
            tokens.append(Token("FLOAT" if is_float else "INT", word, start_line, start_col))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.upper() in _KEYWORDS:
                tokens.append(Token("KEYWORD", word.upper(), start_line, start_col))
            else:
                tokens.append(Token("IDENT", word, start_line, start_col))
            advance(j - i)
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYMBOL", sym, start_line, start_col))
                advance(len(sym))
                break
        else:
            raise SqlSyntaxError(f"unexpected character {ch!r}", start_line, start_col, ch)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> SqlSyntaxError:
        tok = tok or self.peek()
        shown = tok.text if tok.kind != "EOF" else "end of input"
        return SqlSyntaxError(message, tok.line, tok.column, shown)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.text == word

    def accept_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.advance()
            return True
        return False

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.error(f"expected {word}")
        return self.advance()

    def at_symbol(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "SYMBOL" and tok.text == sym

    def accept_symbol(self, sym: str) -> bool:
        if self.at_symbol(sym):
            self.advance()
            return True
        return False

    def expect_symbol(self, sym: str) -> Token:
        if not self.at_symbol(sym):
            raise self.error(f"expected {sym!r}")
        return self.advance()

    def expect_ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise self.error(f"expected {what}")
        self.advance()
        return tok.text

    # query

    def parse_query(self) -> Query:
        self.expect_keyword("SELECT")
        select = self.parse_select_list()
        self.expect_keyword("FROM")
        table = self.expect_ident("table name")
        joins = []
        while self.accept_keyword("JOIN"):
            join_table = self.expect_ident("table name")
            self.expect_keyword("ON")
            left = self.parse_colref()
            self.expect_symbol("=")
            right = self.parse_colref()
            joins.append(JoinClause(join_table, left, right))
        where = None
        if self.accept_keyword("WHERE"):
            where = self.parse_expr()
        group_by: tuple[ColumnRef, ...] = ()
        group_mode = GroupMode.PLAIN
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            cols = [self.parse_colref()]
            while self.accept_symbol(","):
                cols.append(self.parse_colref())
            group_by = tuple(cols)
            if self.accept_keyword("WITH"):
                if self.accept_keyword("ROLLUP"):
                    group_mode = GroupMode.ROLLUP
                elif self.accept_keyword("CUBE"):
                    group_mode = GroupMode.CUBE
                else:
                    raise self.error("expected ROLLUP or CUBE")
        order_by: list[OrderItem] = []
        if self.accept_keyword("ORDER"):
            self.expect_keyword("BY")
            order_by.append(self.parse_order_item())
            while self.accept_symbol(","):
                order_by.append(self.parse_order_item())
        limit = None
        if self.accept_keyword("LIMIT"):
            tok = self.peek()
            if tok.kind != "INT":
                raise self.error("expected a non-negative integer after LIMIT")
            self.advance()
            limit = int(tok.text)
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error("unexpected trailing input")
        return Query(
            select=select,
            table=table,
            joins=tuple(joins),
            where=where,
            group_by=group_by,
            group_mode=group_mode,
            order_by=tuple(order_by),
            limit=limit,
        )

    def parse_select_list(self) -> tuple[SelectItem, ...] | None:
        if self.accept_symbol("*"):
            return None
        items = [self.parse_select_item()]
        while self.accept_symbol(","):
            items.append(self.parse_select_item())
        return tuple(items)

    def parse_select_item(self) -> SelectItem:
        expr = self.parse_expr()
        alias = None
        if self.accept_keyword("AS"):
            alias = self.expect_ident("alias")
        return SelectItem(expr, alias)

    def parse_order_item(self) -> OrderItem:
        ref = self.parse_colref()
        ascending = True
        if self.accept_keyword("DESC"):
            ascending = False
        else:
            self.accept_keyword("ASC")
        return OrderItem(ref, ascending)

    def parse_colref(self) -> ColumnRef:
        first = self.expect_ident("column name")
        if self.accept_symbol("."):
            second = self.expect_ident("column name")
            return ColumnRef(second, qualifier=first)
        return ColumnRef(first)

    # expressions (precedence: OR < AND < NOT < comparison < +- < */ < unary)

    def parse_expr(self) -> Expression:
        return self.parse_or()

    def parse_or(self) -> Expression:
        left = self.parse_and()
        while self.accept_keyword("OR"):
            left = Logic("OR", left, self.parse_and())
        return left

    def parse_and(self) -> Expression:
        left = self.parse_not()
        while self.accept_keyword("AND"):
            left = Logic("AND", left, self.parse_not())
        return left

    def parse_not(self) -> Expression:
        if self.accept_keyword("NOT"):
            return Logic("NOT", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Expression:
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind == "SYMBOL" and tok.text in ("=", "<>", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_additive()
            return Compare(tok.text, left, right)
        return left

    def parse_additive(self) -> Expression:
        left = self.parse_multiplicative()
        while True:
            if self.at_symbol("+"):
                self.advance()
                left = Arith("+", left, self.parse_multiplicative())
            elif self.at_symbol("-"):
                self.advance()
                left = Arith("-", left, self.parse_multiplicative())
            else:
                return left

    def parse_multiplicative(self) -> Expression:
        left = self.parse_unary()
        while True:
            if self.at_symbol("*"):
                self.advance()
                left = Arith("*", left, self.parse_unary())
            elif self.at_symbol("/"):
                self.advance()
                left = Arith("/", left, self.parse_unary())
            else:
                return left

    def parse_unary(self) -> Expression:
        if self.accept_symbol("-"):
            tok = self.peek()
            if tok.kind == "INT":
                self.advance()
                return Literal(self._int_literal("-" + tok.text, tok))
            if tok.kind == "FLOAT":
                self.advance()
                return Literal(-float(tok.text))
            return Arith("-", Literal(0), self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return Literal(self._int_literal(tok.text, tok))
        if tok.kind == "FLOAT":
            self.advance()
            return Literal(float(tok.text))
        if tok.kind == "STRING":
            self.advance()
            return Literal(tok.text)
        if tok.kind == "KEYWORD" and tok.text in ("TRUE", "FALSE"):
            self.advance()
            return Literal(tok.text == "TRUE")
        if self.accept_symbol("("):
            expr = self.parse_expr()
            self.expect_symbol(")")
            return expr
        if tok.kind == "IDENT":
            if tok.text.upper() in AGG_FUNCS and self._next_is_open_paren():
                return self.parse_aggregate()
            return self.parse_colref()
        raise self.error("expected an expression")

    def _next_is_open_paren(self) -> bool:
        nxt = self.tokens[self.pos + 1]
        return nxt.kind == "SYMBOL" and nxt.text == "("

    def parse_aggregate(self) -> Aggregate:
        tok = self.advance()
        func = tok.text.upper()
        self.expect_symbol("(")
        if self.accept_symbol("*"):
            if func != "COUNT":
                raise self.error(f"{func}(*) is not allowed; only COUNT(*)", tok)
            self.expect_symbol(")")
            return Aggregate("COUNT", None)
        arg = self.parse_expr()
        self.expect_symbol(")")
        agg = Aggregate(func, arg)
        return agg

    def _int_literal(self, text: str, tok: Token) -> int:
        value = int(text)
        if value > INT64_MAX or value < INT64_MIN:
            raise self.error("integer literal out of Int64 range", tok)
        return value


def parse_sql(text: str) -> Query:
    """Parse query text to an AST or raise a positioned SqlSyntaxError."""
    return _Parser(tokenize(text)).parse_query()
