//! Parser for the textual CFG format.
//!
//! The format is line-oriented with `#` comments and `;`-terminated
//! statements:
//!
//! ```text
//! entry <id>;
//! node <id> [@ <hex-address>];
//! block <id> [@ <hex-address>];
//! edge <id> -> <id> [access <label>];
//! scope <name> header <id> members <id>,<id>,...;
//! ```
//!
//! An edge label is a block name, a set `{b1,b2,...}` or `?` for an unknown
//! access; an omitted label means the edge accesses nothing.  Statements may
//! appear in any order: resolution happens after the whole document has been
//! read.  Blocks mentioned only in edge labels are interned implicitly; the
//! entry statement implicitly declares its node if no `node` statement does.

use super::{AccessLabel, Cfg, CfgBuilder, CfgError};

pub fn parse_cfg(text: &str) -> Result<Cfg, CfgError> {
    let stmts = Parser::new(text).parse_all()?;

    let mut builder = CfgBuilder::new();

    // Declarations first so that statement order does not matter.
    for stmt in &stmts {
        match stmt {
            Stmt::Node { name, address } => {
                builder.add_node(name, *address)?;
            }
            Stmt::Block { name, address } => {
                builder.declare_block(name, *address)?;
            }
            _ => {}
        }
    }

    let mut entry_seen = false;
    for stmt in &stmts {
        if let Stmt::Entry { name } = stmt {
            if entry_seen {
                return Err(CfgError::DuplicateEntry);
            }
            entry_seen = true;
            let id = match builder.node_id(name) {
                Some(id) => id,
                // A document consisting of just `entry n0;` is legal: the
                // entry brings its node into existence.
                None => builder.add_node(name, None)?,
            };
            builder.set_entry(id)?;
        }
    }

    for stmt in &stmts {
        match stmt {
            Stmt::Edge { src, label, dst } => {
                let src = builder
                    .node_id(src)
                    .ok_or_else(|| CfgError::EdgeEndpointUndeclared(src.clone()))?;
                let dst = builder
                    .node_id(dst)
                    .ok_or_else(|| CfgError::EdgeEndpointUndeclared(dst.clone()))?;
                let label = match label {
                    LabelAst::Empty => AccessLabel::Empty,
                    LabelAst::Unknown => AccessLabel::Unknown,
                    LabelAst::Single(b) => AccessLabel::Single(builder.intern_block(b)),
                    LabelAst::Many(bs) => {
                        AccessLabel::Many(bs.iter().map(|b| builder.intern_block(b)).collect())
                    }
                };
                builder.add_edge(src, label, dst);
            }
            Stmt::Scope { name, header, members } => {
                let header = builder
                    .node_id(header)
                    .ok_or_else(|| CfgError::ScopeMemberUndeclared(header.clone()))?;
                let members = members
                    .iter()
                    .map(|m| {
                        builder.node_id(m).ok_or_else(|| CfgError::ScopeMemberUndeclared(m.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                builder.add_scope(name, header, members);
            }
            _ => {}
        }
    }

    builder.finish()
}

enum Stmt {
    Entry { name: String },
    Node { name: String, address: Option<u64> },
    Block { name: String, address: Option<u64> },
    Edge { src: String, label: LabelAst, dst: String },
    Scope { name: String, header: String, members: Vec<String> },
}

enum LabelAst {
    Empty,
    Single(String),
    Many(Vec<String>),
    Unknown,
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn error(&self, message: impl Into<String>) -> CfgError {
        CfgError::Syntax { line: self.line, column: self.column, message: message.into() }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn is_ident_char(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '_' || c == '.'
    }

    fn ident(&mut self) -> Result<String, CfgError> {
        self.skip_trivia();
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if Self::is_ident_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if s.is_empty() {
            Err(self.error("expected identifier"))
        } else {
            Ok(s)
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), CfgError> {
        self.skip_trivia();
        for expected in token.chars() {
            match self.bump() {
                Some(c) if c == expected => {}
                _ => return Err(self.error(format!("expected `{token}`"))),
            }
        }
        Ok(())
    }

    fn peek_is(&mut self, c: char) -> bool {
        self.skip_trivia();
        self.chars.peek() == Some(&c)
    }

    fn address(&mut self) -> Result<Option<u64>, CfgError> {
        if !self.peek_is('@') {
            return Ok(None);
        }
        self.expect("@")?;
        self.skip_trivia();
        let mut digits = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let digits = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")).unwrap_or(&digits);
        u64::from_str_radix(digits, 16)
            .map(Some)
            .map_err(|_| self.error("expected hexadecimal address"))
    }

    fn label(&mut self) -> Result<LabelAst, CfgError> {
        self.skip_trivia();
        if self.peek_is('?') {
            self.expect("?")?;
            return Ok(LabelAst::Unknown);
        }
        if self.peek_is('{') {
            self.expect("{")?;
            let mut blocks = Vec::new();
            loop {
                blocks.push(self.ident()?);
                if self.peek_is(',') {
                    self.expect(",")?;
                } else {
                    break;
                }
            }
            self.expect("}")?;
            return Ok(LabelAst::Many(blocks));
        }
        Ok(LabelAst::Single(self.ident()?))
    }

    fn parse_all(&mut self) -> Result<Vec<Stmt>, CfgError> {
        let mut stmts = Vec::new();
        loop {
            self.skip_trivia();
            if self.chars.peek().is_none() {
                return Ok(stmts);
            }
            let keyword = self.ident()?;
            let stmt = match keyword.as_str() {
                "entry" => Stmt::Entry { name: self.ident()? },
                "node" => {
                    let name = self.ident()?;
                    Stmt::Node { name, address: self.address()? }
                }
                "block" => {
                    let name = self.ident()?;
                    Stmt::Block { name, address: self.address()? }
                }
                "edge" => {
                    let src = self.ident()?;
                    self.expect("->")?;
                    let dst = self.ident()?;
                    let label = if self.peek_is(';') {
                        LabelAst::Empty
                    } else {
                        let kw = self.ident()?;
                        if kw != "access" {
                            return Err(self.error(format!("expected `access` or `;`, found `{kw}`")));
                        }
                        self.label()?
                    };
                    Stmt::Edge { src, label, dst }
                }
                "scope" => {
                    let name = self.ident()?;
                    let kw = self.ident()?;
                    if kw != "header" {
                        return Err(self.error(format!("expected `header`, found `{kw}`")));
                    }
                    let header = self.ident()?;
                    let kw = self.ident()?;
                    if kw != "members" {
                        return Err(self.error(format!("expected `members`, found `{kw}`")));
                    }
                    let mut members = vec![self.ident()?];
                    while self.peek_is(',') {
                        self.expect(",")?;
                        members.push(self.ident()?);
                    }
                    Stmt::Scope { name, header, members }
                }
                other => return Err(self.error(format!("unknown statement `{other}`"))),
            };
            self.expect(";")?;
            stmts.push(stmt);
        }
    }
}
