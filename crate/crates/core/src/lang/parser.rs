use std::collections::HashMap;

use num_bigint::BigInt;

use super::ast::{Ast, BinOp, Expr, Stmt, StmtKind, UnOp, VarId};
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, SourceProgram};

pub fn parse(source: &SourceProgram) -> Result<Ast, ParseError> {
    let tokens = tokenize(&source.text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars: Vec::new(),
        scope: HashMap::new(),
    };
    p.program(&source.name)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    scope: HashMap<String, VarId>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn line(&self) -> u32 {
        self.tokens[self.pos].line
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.tokens[self.pos];
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, u32)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let line = self.line();
                self.advance();
                Ok((name, line))
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn lookup(&self, name: &str, line: u32) -> PResult<VarId> {
        self.scope
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::UndeclaredVariable {
                name: name.to_string(),
                line,
            })
    }

    fn declare(&mut self, name: String) -> VarId {
        if let Some(&id) = self.scope.get(&name) {
            return id;
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(name.clone());
        self.scope.insert(name, id);
        id
    }

    fn program(&mut self, name: &str) -> PResult<Ast> {
        let mut main: Option<(Vec<Stmt>, u32)> = None;
        while *self.peek() != Tok::Eof {
            self.expect(Tok::Int, "'int'")?;
            let (fname, line) = self.ident()?;
            self.expect(Tok::LParen, "'('")?;
            self.eat(&Tok::Void);
            self.expect(Tok::RParen, "')'")?;
            match fname.as_str() {
                "nondet" => {
                    self.expect(Tok::Semi, "';' after nondet declaration")?;
                }
                "main" => {
                    if main.is_some() {
                        return Err(ParseError::Syntax {
                            line,
                            col: 1,
                            message: "duplicate definition of main".into(),
                        });
                    }
                    main = Some(self.block()?);
                }
                other => {
                    return Err(ParseError::Syntax {
                        line,
                        col: 1,
                        message: format!("unsupported function '{other}': only main is allowed"),
                    })
                }
            }
        }
        let Some((body, end_line)) = main else {
            return self.error("missing function main");
        };
        Ok(Ast {
            name: name.to_string(),
            vars: std::mem::take(&mut self.vars),
            body,
            end_line,
        })
    }

    /// Parses `{ stmt* }`, returning the statements and the closing-brace line.
    fn block(&mut self) -> PResult<(Vec<Stmt>, u32)> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.error("unexpected end of input, expected '}'");
            }
            stmts.push(self.stmt()?);
        }
        let close = self.advance();
        Ok((stmts, close.line))
    }

    /// Loop and branch bodies: a block or a single statement.
    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if *self.peek() == Tok::LBrace {
            Ok(self.block()?.0)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let line = self.line();
        let kind = match self.peek() {
            Tok::Int => {
                let s = self.decl()?;
                self.expect(Tok::Semi, "';'")?;
                return Ok(s);
            }
            Tok::If => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let then_branch = self.body()?;
                let else_branch = if self.eat(&Tok::Else) {
                    Some(self.body()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::While => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.body()?;
                StmtKind::While { cond, body }
            }
            Tok::For => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let init = match self.peek() {
                    Tok::Semi => None,
                    Tok::Int => Some(Box::new(self.decl()?)),
                    _ => Some(Box::new(self.simple()?)),
                };
                self.expect(Tok::Semi, "';'")?;
                let cond = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';'")?;
                let update = if *self.peek() == Tok::RParen {
                    None
                } else {
                    Some(Box::new(self.simple()?))
                };
                self.expect(Tok::RParen, "')'")?;
                let body = self.body()?;
                StmtKind::For {
                    init,
                    cond,
                    update,
                    body,
                }
            }
            Tok::Assert => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Assert(e)
            }
            Tok::Return => {
                self.advance();
                let e = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Return(e)
            }
            Tok::Semi => {
                self.advance();
                StmtKind::Skip
            }
            Tok::Ident(_) => {
                let s = self.simple()?;
                self.expect(Tok::Semi, "';'")?;
                return Ok(s);
            }
            other => {
                let msg = format!("expected statement, found {}", describe(other));
                return self.error(msg);
            }
        };
        Ok(Stmt { kind, line })
    }

    fn decl(&mut self) -> PResult<Stmt> {
        let line = self.line();
        self.expect(Tok::Int, "'int'")?;
        let (name, _) = self.ident()?;
        let init = if self.eat(&Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        // declared after the initializer so `int x = x;` is rejected
        let var = self.declare(name);
        Ok(Stmt {
            kind: StmtKind::Decl { var, init },
            line,
        })
    }

    /// `x = e`, `x += e`, `x -= e`, `x++`, `x--`.
    fn simple(&mut self) -> PResult<Stmt> {
        let (name, line) = self.ident()?;
        let var = self.lookup(&name, line)?;
        let current = Expr::Var(var);
        let value = match self.peek() {
            Tok::Assign => {
                self.advance();
                self.expr()?
            }
            Tok::PlusAssign => {
                self.advance();
                Expr::binary(BinOp::Add, current, self.expr()?)
            }
            Tok::MinusAssign => {
                self.advance();
                Expr::binary(BinOp::Sub, current, self.expr()?)
            }
            Tok::PlusPlus => {
                self.advance();
                Expr::binary(BinOp::Add, current, Expr::int(1))
            }
            Tok::MinusMinus => {
                self.advance();
                Expr::binary(BinOp::Sub, current, Expr::int(1))
            }
            other => {
                let msg = format!("expected assignment, found {}", describe(other));
                return self.error(msg);
            }
        };
        Ok(Stmt {
            kind: StmtKind::Assign { var, value },
            line,
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = binop(self.peek()) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.advance();
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Bang => {
                self.advance();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::True => {
                self.advance();
                Ok(Expr::Int(BigInt::from(1)))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::Int(BigInt::from(0)))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let line = self.line();
                if *self.peek_at(1) == Tok::LParen {
                    if name != "nondet" {
                        return self.error(format!("call to unknown function '{name}'"));
                    }
                    self.advance();
                    self.advance();
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::Nondet);
                }
                self.advance();
                Ok(Expr::Var(self.lookup(&name, line)?))
            }
            other => self.error(format!("expected expression, found {}", describe(&other))),
        }
    }
}

fn binop(t: &Tok) -> Option<BinOp> {
    Some(match t {
        Tok::Plus => BinOp::Add,
        Tok::Minus => BinOp::Sub,
        Tok::Star => BinOp::Mul,
        Tok::Slash => BinOp::Div,
        Tok::Percent => BinOp::Rem,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        Tok::EqEq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::AndAnd => BinOp::And,
        Tok::OrOr => BinOp::Or,
        _ => return None,
    })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Num(n) => format!("number {n}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}
