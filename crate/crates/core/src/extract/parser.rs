use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

const AUG_OPS: &[(&str, BinOp)] = &[
    ("+=", BinOp::Add),
    ("-=", BinOp::Sub),
    ("*=", BinOp::Mult),
    ("@=", BinOp::MatMult),
    ("/=", BinOp::Div),
    ("//=", BinOp::FloorDiv),
    ("%=", BinOp::Mod),
    ("**=", BinOp::Pow),
    ("<<=", BinOp::LShift),
    (">>=", BinOp::RShift),
    ("|=", BinOp::BitOr),
    ("^=", BinOp::BitXor),
    ("&=", BinOp::BitAnd),
];

pub fn parse_text(text: &str) -> Result<Module, SyntaxError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut body = Vec::new();
    while !p.at_eof() {
        if p.eat_newline() {
            continue;
        }
        body.extend(p.statement()?);
    }
    Ok(Module { body })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn tok(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_tok(&self, off: usize) -> &Tok {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)].tok
    }

    fn line(&self) -> u32 {
        self.tok().line
    }

    fn bump(&mut self) -> Token {
        let t = self.tok().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.tok().tok == Tok::Eof
    }

    fn err_here(&self, msg: impl Into<String>) -> SyntaxError {
        let t = self.tok();
        SyntaxError {
            line: t.line,
            column: t.col,
            message: msg.into(),
        }
    }

    fn unexpected(&self) -> SyntaxError {
        let what = match &self.tok().tok {
            Tok::Name(n) => format!("'{n}'"),
            Tok::Int(v) => v.to_string(),
            Tok::Float(v) => v.to_string(),
            Tok::Str(_) => "string".into(),
            Tok::Op(o) => format!("'{o}'"),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of file".into(),
        };
        self.err_here(format!("unexpected {what}"))
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(&self.tok().tok, Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.tok().tok, Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), SyntaxError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.err_here(format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err_here(format!("expected '{kw}'")))
        }
    }

    fn eat_newline(&mut self) -> bool {
        if self.tok().tok == Tok::Newline {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match &self.tok().tok {
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn dotted_name(&mut self) -> Result<String, SyntaxError> {
        let mut name = self.ident()?;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    // ---- statements ----

    fn statement(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let line = self.line();
        let kind = match &self.tok().tok {
            Tok::Name(n) => match n.as_str() {
                "def" => Some(self.function_def()?),
                "for" => Some(self.for_stmt()?),
                "while" => Some(self.while_stmt()?),
                "if" => Some(self.if_stmt()?),
                "with" => Some(self.with_stmt()?),
                "class" => Some(self.class_def()?),
                "try" => Some(self.try_stmt()?),
                "async" => {
                    self.bump();
                    if !(self.is_kw("def") || self.is_kw("for") || self.is_kw("with")) {
                        return Err(self.unexpected());
                    }
                    self.statement()?;
                    Some(StmtKind::Opaque("async"))
                }
                _ => None,
            },
            Tok::Op("@") => {
                while self.eat_op("@") {
                    self.test()?;
                    self.expect_newline()?;
                }
                if !(self.is_kw("def") || self.is_kw("class") || self.is_kw("async")) {
                    return Err(self.err_here("expected definition after decorator"));
                }
                self.statement()?;
                Some(StmtKind::Opaque("decorated"))
            }
            Tok::Indent => return Err(self.err_here("unexpected indent")),
            _ => None,
        };
        match kind {
            Some(kind) => Ok(vec![Stmt { line, kind }]),
            None => self.simple_line(),
        }
    }

    fn expect_newline(&mut self) -> Result<(), SyntaxError> {
        if self.eat_newline() || self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    /// Simple statements separated by `;`, ending in NEWLINE.
    fn simple_line(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = vec![self.simple_stmt()?];
        while self.eat_op(";") {
            if self.tok().tok == Tok::Newline || self.at_eof() {
                break;
            }
            out.push(self.simple_stmt()?);
        }
        self.expect_newline()?;
        Ok(out)
    }

    fn simple_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let line = self.line();
        let kind = if let Tok::Name(n) = &self.tok().tok {
            match n.as_str() {
                "pass" => {
                    self.bump();
                    StmtKind::Pass
                }
                "break" => {
                    self.bump();
                    StmtKind::Break
                }
                "continue" => {
                    self.bump();
                    StmtKind::Continue
                }
                "return" => {
                    self.bump();
                    if self.at_simple_end() {
                        StmtKind::Return(None)
                    } else {
                        StmtKind::Return(Some(self.testlist()?))
                    }
                }
                "import" => {
                    self.bump();
                    let mut modules = Vec::new();
                    loop {
                        modules.push(self.dotted_name()?);
                        if self.eat_kw("as") {
                            self.ident()?;
                        }
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    StmtKind::Import { modules }
                }
                "from" => self.import_from()?,
                "global" | "nonlocal" => {
                    self.bump();
                    self.ident()?;
                    while self.eat_op(",") {
                        self.ident()?;
                    }
                    StmtKind::Opaque("global")
                }
                "del" => {
                    self.bump();
                    self.testlist()?;
                    StmtKind::Opaque("del")
                }
                "assert" => {
                    self.bump();
                    self.test()?;
                    if self.eat_op(",") {
                        self.test()?;
                    }
                    StmtKind::Opaque("assert")
                }
                "raise" => {
                    self.bump();
                    if !self.at_simple_end() {
                        self.test()?;
                        if self.eat_kw("from") {
                            self.test()?;
                        }
                    }
                    StmtKind::Opaque("raise")
                }
                _ => self.expr_stmt()?,
            }
        } else {
            self.expr_stmt()?
        };
        Ok(Stmt { line, kind })
    }

    fn at_simple_end(&self) -> bool {
        matches!(self.tok().tok, Tok::Newline | Tok::Eof) || self.is_op(";")
    }

    fn import_from(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("from")?;
        let mut module = String::new();
        while self.is_op(".") || self.is_op("...") {
            let Tok::Op(o) = self.bump().tok else {
                unreachable!()
            };
            module.push_str(o);
        }
        if !self.is_kw("import") {
            module.push_str(&self.dotted_name()?);
        }
        self.expect_kw("import")?;
        let mut names = Vec::new();
        if self.eat_op("*") {
            names.push("*".into());
        } else {
            let paren = self.eat_op("(");
            loop {
                names.push(self.ident()?);
                if self.eat_kw("as") {
                    self.ident()?;
                }
                if !self.eat_op(",") {
                    break;
                }
                if paren && self.is_op(")") {
                    break;
                }
            }
            if paren {
                self.expect_op(")")?;
            }
        }
        Ok(StmtKind::ImportFrom { module, names })
    }

    fn expr_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        let first = self.testlist_star()?;
        if let Some(&(_, op)) = AUG_OPS.iter().find(|(o, _)| self.is_op(o)) {
            self.bump();
            let value = self.testlist()?;
            return Ok(StmtKind::AugAssign {
                target: first,
                op,
                value,
            });
        }
        if self.eat_op(":") {
            self.test()?;
            if self.eat_op("=") {
                let value = self.testlist_star()?;
                return Ok(StmtKind::Assign {
                    targets: vec![first],
                    value,
                });
            }
            return Ok(StmtKind::Opaque("annotation"));
        }
        if self.is_op("=") {
            let mut targets = vec![first];
            let mut value;
            loop {
                self.expect_op("=")?;
                value = self.testlist_star()?;
                if !self.is_op("=") {
                    break;
                }
                targets.push(value);
            }
            return Ok(StmtKind::Assign { targets, value });
        }
        Ok(StmtKind::Expr(first))
    }

    fn suite(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_op(":")?;
        if !self.eat_newline() {
            return self.simple_line();
        }
        if self.tok().tok != Tok::Indent {
            return Err(self.err_here("expected an indented block"));
        }
        self.bump();
        let mut body = Vec::new();
        while self.tok().tok != Tok::Dedent && !self.at_eof() {
            if self.eat_newline() {
                continue;
            }
            body.extend(self.statement()?);
        }
        if self.tok().tok == Tok::Dedent {
            self.bump();
        }
        Ok(body)
    }

    fn function_def(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.is_op(")") {
            if self.eat_op("/") {
            } else if self.eat_op("**") || self.eat_op("*") {
                if !self.is_op(",") && !self.is_op(")") {
                    params.push(self.ident()?);
                }
            } else {
                params.push(self.ident()?);
            }
            if self.eat_op(":") {
                self.test()?;
            }
            if self.eat_op("=") {
                self.test()?;
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if self.eat_op("->") {
            self.test()?;
        }
        let body = self.suite()?;
        Ok(StmtKind::FunctionDef { name, params, body })
    }

    fn class_def(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("class")?;
        self.ident()?;
        if self.eat_op("(") {
            self.call_args()?;
        }
        self.suite()?;
        Ok(StmtKind::Opaque("class"))
    }

    fn try_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("try")?;
        self.suite()?;
        let mut handlers = 0;
        while self.eat_kw("except") {
            handlers += 1;
            self.eat_op("*");
            if !self.is_op(":") {
                self.test()?;
                if self.eat_kw("as") || self.eat_op(",") {
                    self.ident()?;
                }
            }
            self.suite()?;
        }
        if handlers > 0 && self.eat_kw("else") {
            self.suite()?;
        }
        if self.eat_kw("finally") {
            self.suite()?;
        } else if handlers == 0 {
            return Err(self.err_here("expected 'except' or 'finally'"));
        }
        Ok(StmtKind::Opaque("try"))
    }

    fn for_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("for")?;
        let target = self.target_list()?;
        self.expect_kw("in")?;
        let iter = self.testlist()?;
        let body = self.suite()?;
        let orelse = if self.eat_kw("else") {
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::For {
            target,
            iter,
            body,
            orelse,
        })
    }

    fn while_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("while")?;
        let test = self.named_test()?;
        let body = self.suite()?;
        let orelse = if self.eat_kw("else") {
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::While { test, body, orelse })
    }

    fn if_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.bump(); // `if` or `elif`
        let test = self.named_test()?;
        let body = self.suite()?;
        let orelse = if self.is_kw("elif") {
            let line = self.line();
            vec![Stmt {
                line,
                kind: self.if_stmt()?,
            }]
        } else if self.eat_kw("else") {
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::If { test, body, orelse })
    }

    fn with_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("with")?;
        let mut items = Vec::new();
        loop {
            let ctx = self.test()?;
            let target = if self.eat_kw("as") {
                Some(self.target_atom()?)
            } else {
                None
            };
            items.push((ctx, target));
            if !self.eat_op(",") {
                break;
            }
        }
        let body = self.suite()?;
        Ok(StmtKind::With { items, body })
    }

    /// `for` targets: comma-separated expressions stopping before `in`.
    fn target_list(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let first = self.target_atom()?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_kw("in") {
                break;
            }
            items.push(self.target_atom()?);
        }
        Ok(Expr {
            line,
            kind: ExprKind::Tuple(items),
        })
    }

    fn target_atom(&mut self) -> Result<Expr, SyntaxError> {
        if self.is_op("*") {
            let line = self.line();
            self.bump();
            let inner = self.expr()?;
            return Ok(Expr {
                line,
                kind: ExprKind::Starred(Box::new(inner)),
            });
        }
        self.expr()
    }

    // ---- expressions ----

    fn testlist(&mut self) -> Result<Expr, SyntaxError> {
        self.sequence(false)
    }

    fn testlist_star(&mut self) -> Result<Expr, SyntaxError> {
        self.sequence(true)
    }

    fn sequence(&mut self, star: bool) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let element = |p: &mut Self| -> Result<Expr, SyntaxError> {
            if star && p.is_op("*") {
                p.target_atom()
            } else {
                p.test()
            }
        };
        let first = element(self)?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_sequence_end() {
                break;
            }
            items.push(element(self)?);
        }
        Ok(Expr {
            line,
            kind: ExprKind::Tuple(items),
        })
    }

    fn at_sequence_end(&self) -> bool {
        matches!(self.tok().tok, Tok::Newline | Tok::Eof)
            || [")", "]", "}", "=", ";", ":"].iter().any(|o| self.is_op(o))
            || AUG_OPS.iter().any(|(o, _)| self.is_op(o))
    }

    /// A test that may be a walrus assignment; the binding is dropped.
    fn named_test(&mut self) -> Result<Expr, SyntaxError> {
        let e = self.test()?;
        if self.eat_op(":=") {
            return self.test();
        }
        Ok(e)
    }

    fn test(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        if self.eat_kw("lambda") {
            while !self.is_op(":") {
                if self.at_eof() || self.tok().tok == Tok::Newline {
                    return Err(self.err_here("expected ':' in lambda"));
                }
                self.bump();
            }
            self.bump();
            self.test()?;
            return Ok(Expr {
                line,
                kind: ExprKind::Opaque("lambda"),
            });
        }
        let body = self.or_test()?;
        if self.is_kw("if") {
            self.bump();
            let test = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(Expr {
                line,
                kind: ExprKind::IfExp {
                    test: Box::new(test),
                    body: Box::new(body),
                    orelse: Box::new(orelse),
                },
            });
        }
        Ok(body)
    }

    fn or_test(&mut self) -> Result<Expr, SyntaxError> {
        self.bool_chain("or", BoolOp::Or, Self::and_test)
    }

    fn and_test(&mut self) -> Result<Expr, SyntaxError> {
        self.bool_chain("and", BoolOp::And, Self::not_test)
    }

    fn bool_chain(
        &mut self,
        kw: &str,
        op: BoolOp,
        next: fn(&mut Self) -> Result<Expr, SyntaxError>,
    ) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let first = next(self)?;
        if !self.is_kw(kw) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(kw) {
            values.push(next(self)?);
        }
        Ok(Expr {
            line,
            kind: ExprKind::BoolOp { op, values },
        })
    }

    fn not_test(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        if self.eat_kw("not") {
            let operand = self.not_test()?;
            return Ok(Expr {
                line,
                kind: ExprKind::UnaryOp {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
            });
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<CmpOp> {
        let op = match &self.tok().tok {
            Tok::Op("==") => CmpOp::Eq,
            Tok::Op("!=") => CmpOp::NotEq,
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::LtE,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::GtE,
            Tok::Name(n) if n == "in" => CmpOp::In,
            Tok::Name(n) if n == "not" && *self.peek_tok(1) == Tok::Name("in".into()) => {
                self.bump();
                CmpOp::NotIn
            }
            Tok::Name(n) if n == "is" => {
                if *self.peek_tok(1) == Tok::Name("not".into()) {
                    self.bump();
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            }
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let left = self.expr()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        while let Some(op) = self.comp_op() {
            ops.push(op);
            comparators.push(self.expr()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(Expr {
            line,
            kind: ExprKind::Compare {
                left: Box::new(left),
                ops,
                comparators,
            },
        })
    }

    fn binary_level(
        &mut self,
        table: &[(&str, BinOp)],
        next: fn(&mut Self) -> Result<Expr, SyntaxError>,
    ) -> Result<Expr, SyntaxError> {
        let mut left = next(self)?;
        while let Some(&(_, op)) = table.iter().find(|(o, _)| self.is_op(o)) {
            let line = left.line;
            self.bump();
            let right = next(self)?;
            left = Expr {
                line,
                kind: ExprKind::BinOp {
                    left: Box::new(left),
                    op,
                    right: Box::new(right),
                },
            };
        }
        Ok(left)
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&[("|", BinOp::BitOr)], Self::xor_expr)
    }

    fn xor_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&[("^", BinOp::BitXor)], Self::and_expr)
    }

    fn and_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&[("&", BinOp::BitAnd)], Self::shift_expr)
    }

    fn shift_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(
            &[("<<", BinOp::LShift), (">>", BinOp::RShift)],
            Self::arith_expr,
        )
    }

    fn arith_expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::term)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(
            &[
                ("*", BinOp::Mult),
                ("/", BinOp::Div),
                ("//", BinOp::FloorDiv),
                ("%", BinOp::Mod),
                ("@", BinOp::MatMult),
            ],
            Self::factor,
        )
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let op = match &self.tok().tok {
            Tok::Op("-") => UnaryOp::Neg,
            Tok::Op("+") => UnaryOp::Pos,
            Tok::Op("~") => UnaryOp::Invert,
            _ => return self.power(),
        };
        self.bump();
        let operand = self.factor()?;
        Ok(Expr {
            line,
            kind: ExprKind::UnaryOp {
                op,
                operand: Box::new(operand),
            },
        })
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        self.eat_kw("await");
        let base = self.atom_trailers()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr {
                line: base.line,
                kind: ExprKind::BinOp {
                    left: Box::new(base),
                    op: BinOp::Pow,
                    right: Box::new(exp),
                },
            });
        }
        Ok(base)
    }

    fn atom_trailers(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            let line = e.line;
            if self.eat_op("(") {
                let (args, keywords) = self.call_args()?;
                e = Expr {
                    line,
                    kind: ExprKind::Call {
                        func: Box::new(e),
                        args,
                        keywords,
                    },
                };
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                e = Expr {
                    line,
                    kind: ExprKind::Subscript {
                        value: Box::new(e),
                        index: Box::new(index),
                    },
                };
            } else if self.eat_op(".") {
                let attr = self.ident()?;
                e = Expr {
                    line,
                    kind: ExprKind::Attribute {
                        value: Box::new(e),
                        attr,
                    },
                };
            } else {
                return Ok(e);
            }
        }
    }

    /// Arguments after `(`, consuming the closing `)`.
    fn call_args(&mut self) -> Result<(Vec<Expr>, Vec<Keyword>), SyntaxError> {
        let mut args = Vec::new();
        let mut keywords = Vec::new();
        while !self.is_op(")") {
            let line = self.line();
            if self.eat_op("**") {
                keywords.push(Keyword {
                    name: None,
                    value: self.test()?,
                });
            } else if self.eat_op("*") {
                let inner = self.test()?;
                args.push(Expr {
                    line,
                    kind: ExprKind::Starred(Box::new(inner)),
                });
            } else if matches!(self.tok().tok, Tok::Name(_)) && *self.peek_tok(1) == Tok::Op("=") {
                let name = self.ident()?;
                self.bump();
                keywords.push(Keyword {
                    name: Some(name),
                    value: self.test()?,
                });
            } else {
                let value = self.named_test()?;
                if self.is_kw("for") || self.is_kw("async") {
                    self.skip_to_close()?;
                    args.push(Expr {
                        line,
                        kind: ExprKind::Opaque("comprehension"),
                    });
                    return Ok((args, keywords));
                }
                args.push(value);
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        Ok((args, keywords))
    }

    /// Skips to and consumes the bracket closing the current group.
    fn skip_to_close(&mut self) -> Result<(), SyntaxError> {
        let mut depth = 0usize;
        loop {
            match &self.tok().tok {
                Tok::Eof => return Err(self.err_here("unclosed bracket")),
                Tok::Op("(" | "[" | "{") => depth += 1,
                Tok::Op(")" | "]" | "}") => {
                    if depth == 0 {
                        self.bump();
                        return Ok(());
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn subscript_list(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let first = self.subscript()?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_op("]") {
                break;
            }
            items.push(self.subscript()?);
        }
        Ok(Expr {
            line,
            kind: ExprKind::Tuple(items),
        })
    }

    fn subscript(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let bound = |p: &mut Self| -> Result<Option<Box<Expr>>, SyntaxError> {
            if p.is_op(":") || p.is_op("]") || p.is_op(",") {
                Ok(None)
            } else {
                Ok(Some(Box::new(p.test()?)))
            }
        };
        let lower = bound(self)?;
        if !self.eat_op(":") {
            return lower.map(|b| *b).ok_or_else(|| self.unexpected());
        }
        let upper = bound(self)?;
        let step = if self.eat_op(":") { bound(self)? } else { None };
        Ok(Expr {
            line,
            kind: ExprKind::Slice { lower, upper, step },
        })
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let line = self.line();
        let kind = match self.tok().tok.clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::Float(v) => {
                self.bump();
                ExprKind::Float(v)
            }
            Tok::Str(s) => {
                self.bump();
                let mut s = s;
                while let Tok::Str(more) = &self.tok().tok {
                    s.push_str(more);
                    self.bump();
                }
                ExprKind::Str(s)
            }
            Tok::Name(n) => match n.as_str() {
                "True" => {
                    self.bump();
                    ExprKind::Bool(true)
                }
                "False" => {
                    self.bump();
                    ExprKind::Bool(false)
                }
                "None" => {
                    self.bump();
                    ExprKind::NoneLit
                }
                "yield" => {
                    self.bump();
                    if !self.at_sequence_end() {
                        self.eat_kw("from");
                        self.testlist()?;
                    }
                    ExprKind::Opaque("yield")
                }
                _ => ExprKind::Name(self.ident()?),
            },
            Tok::Op("...") => {
                self.bump();
                ExprKind::Opaque("ellipsis")
            }
            Tok::Op("(") => {
                self.bump();
                return self.group(line, ")", true);
            }
            Tok::Op("[") => {
                self.bump();
                return self.group(line, "]", false);
            }
            Tok::Op("{") => {
                self.bump();
                self.skip_to_close()?;
                ExprKind::Opaque("dict")
            }
            _ => return Err(self.unexpected()),
        };
        Ok(Expr { line, kind })
    }

    /// Parenthesised or bracketed display after its opening token.
    fn group(&mut self, line: u32, close: &str, paren: bool) -> Result<Expr, SyntaxError> {
        let wrap = |items: Vec<Expr>| {
            if paren {
                ExprKind::Tuple(items)
            } else {
                ExprKind::List(items)
            }
        };
        if self.eat_op(close) {
            return Ok(Expr {
                line,
                kind: wrap(Vec::new()),
            });
        }
        let first = if self.is_op("*") {
            self.target_atom()?
        } else {
            self.named_test()?
        };
        if self.is_kw("for") || self.is_kw("async") {
            self.skip_to_close()?;
            return Ok(Expr {
                line,
                kind: ExprKind::Opaque("comprehension"),
            });
        }
        if paren && self.eat_op(close) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_op(close) {
                break;
            }
            items.push(if self.is_op("*") {
                self.target_atom()?
            } else {
                self.named_test()?
            });
        }
        self.expect_op(close)?;
        Ok(Expr {
            line,
            kind: wrap(items),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> StmtKind {
        let m = parse_text(src).unwrap();
        assert_eq!(m.body.len(), 1, "{src}");
        m.body.into_iter().next().unwrap().kind
    }

    #[test]
    fn smallest_program() {
        let m = parse_text("x = 1\n").unwrap();
        assert_eq!(
            m.body,
            vec![Stmt {
                line: 1,
                kind: StmtKind::Assign {
                    targets: vec![Expr {
                        line: 1,
                        kind: ExprKind::Name("x".into())
                    }],
                    value: Expr {
                        line: 1,
                        kind: ExprKind::Int(1)
                    },
                },
            }]
        );
    }

    #[test]
    fn malformed_def_is_a_syntax_error_on_line_1() {
        let e = parse_text("def f(:").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn precedence() {
        let StmtKind::Expr(e) = one("r + g * m ** 2 < 3 and not d\n") else {
            panic!()
        };
        let ExprKind::BoolOp {
            op: BoolOp::And,
            values,
        } = e.kind
        else {
            panic!()
        };
        let ExprKind::Compare { left, .. } = &values[0].kind else {
            panic!()
        };
        let ExprKind::BinOp {
            op: BinOp::Add,
            right,
            ..
        } = &left.kind
        else {
            panic!()
        };
        assert!(matches!(
            right.kind,
            ExprKind::BinOp {
                op: BinOp::Mult,
                ..
            }
        ));
    }

    #[test]
    fn tuple_unpack_assignment() {
        let StmtKind::Assign { targets, value } = one("s, r, done, _ = env.step(a)\n") else {
            panic!()
        };
        let ExprKind::Tuple(items) = &targets[0].kind else {
            panic!()
        };
        assert_eq!(items.len(), 4);
        assert_eq!(value.callee_tail(), Some("step"));
    }

    #[test]
    fn elif_nests_in_orelse() {
        let StmtKind::If { orelse, .. } = one("if a:\n    x\nelif b:\n    y\nelse:\n    z\n")
        else {
            panic!()
        };
        assert_eq!(orelse.len(), 1);
        assert_eq!(orelse[0].line, 3);
        let StmtKind::If { orelse: inner, .. } = &orelse[0].kind else {
            panic!()
        };
        assert_eq!(inner[0].line, 6);
    }

    #[test]
    fn opaque_constructs_are_skipped() {
        let src = "@dec\ndef f(x):\n    return x\nclass A(B):\n    def g(self): pass\n\
                   try:\n    x = 1\nexcept ValueError as e:\n    pass\nfinally:\n    y = 2\n\
                   z = [i for i in range(3)]\nw = lambda q: q + 1\nd = {'a': 1}\n";
        let m = parse_text(src).unwrap();
        let kinds: Vec<_> = m.body.iter().map(|s| &s.kind).collect();
        assert!(matches!(kinds[0], StmtKind::Opaque("decorated")));
        assert!(matches!(kinds[1], StmtKind::Opaque("class")));
        assert!(matches!(kinds[2], StmtKind::Opaque("try")));
        let StmtKind::Assign { value, .. } = kinds[3] else {
            panic!()
        };
        assert_eq!(value.kind, ExprKind::Opaque("comprehension"));
    }

    #[test]
    fn one_line_suites_and_semicolons() {
        let m = parse_text("if done: break\na = 1; b = 2\nx: int = 3\n").unwrap();
        assert_eq!(m.body.len(), 4);
        let StmtKind::If { body, .. } = &m.body[0].kind else {
            panic!()
        };
        assert_eq!(body[0].kind, StmtKind::Break);
    }

    #[test]
    fn calls_keywords_and_slices() {
        let StmtKind::Expr(e) =
            one("model.add(Dense(24, input_dim=n, activation='relu'))[0][:, 1:]\n")
        else {
            panic!()
        };
        let ExprKind::Subscript { index, .. } = &e.kind else {
            panic!()
        };
        assert!(matches!(index.kind, ExprKind::Tuple(_)));
    }

    #[test]
    fn bad_indentation_and_missing_block() {
        assert!(parse_text("for x in y:\nz\n").is_err());
        assert!(parse_text("  x = 1\n").is_err());
    }
}
