//! Recursive-descent parser for `.mps` programs.

use crate::label::{CommLabel, Kind, Message, Prefix};

use super::lexer::{tokenize, Tok};
use super::{is_keyword, Pos, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

/// Surface process term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcTerm {
    End,
    Ref(Ident),
    Sum(Vec<(Prefix, Pos, ProcTerm)>),
}

/// Surface global-type term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlobalTerm {
    End,
    Ref(Ident),
    Sum(Vec<(CommLabel, Pos, GlobalTerm)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Process { name: Ident, body: ProcTerm },
    Global { name: Ident, body: GlobalTerm },
    Session { name: Ident, network: Vec<(Ident, ProcTerm)>, queue: Vec<Message> },
}

impl Decl {
    pub fn name(&self) -> &Ident {
        match self {
            Decl::Process { name, .. } | Decl::Global { name, .. } | Decl::Session { name, .. } => name,
        }
    }
}

/// Parsed declarations, in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, at: 0 };
    let mut decls: Vec<Decl> = Vec::new();
    while parser.peek() != &Tok::Eof {
        let decl = parser.decl()?;
        let name = decl.name();
        if decls.iter().any(|d| d.name().name == name.name) {
            return Err(SyntaxError::DuplicateDefinition {
                name: name.name.clone(),
                line: name.pos.line,
                col: name.pos.col,
            });
        }
        decls.push(decl);
    }
    Ok(Program { decls })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

/// A parsed summand before flattening.
enum Term<T> {
    End,
    Ref(Ident),
    Sum(Vec<T>),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.at + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        let pos = self.pos();
        Err(SyntaxError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, SyntaxError> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.error(&tok.describe())
        }
    }

    fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.next().1;
                Ok(Ident { name, pos })
            }
            _ => self.error("an identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.error(&format!("`{kw}`")),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn definition_name(&mut self) -> Result<Ident, SyntaxError> {
        let id = self.ident()?;
        if is_keyword(&id.name) {
            return Err(SyntaxError::Syntax {
                line: id.pos.line,
                col: id.pos.col,
                msg: format!("`{}` is a keyword and cannot name a definition", id.name),
            });
        }
        Ok(id)
    }

    fn decl(&mut self) -> Result<Decl, SyntaxError> {
        if self.at_keyword("participant") {
            self.next();
            let name = self.definition_name()?;
            self.expect(Tok::Eq)?;
            let body = self.proc()?;
            Ok(Decl::Process { name, body })
        } else if self.at_keyword("global") {
            self.next();
            let name = self.definition_name()?;
            self.expect(Tok::Eq)?;
            let body = self.gtype()?;
            Ok(Decl::Global { name, body })
        } else if self.at_keyword("session") {
            self.next();
            let name = self.definition_name()?;
            self.expect(Tok::Eq)?;
            let mut network = vec![self.binding()?];
            while *self.peek() == Tok::Par {
                self.next();
                network.push(self.binding()?);
            }
            self.keyword("with")?;
            let queue = self.queue()?;
            Ok(Decl::Session { name, network, queue })
        } else {
            self.error("`participant`, `global` or `session`")
        }
    }

    fn binding(&mut self) -> Result<(Ident, ProcTerm), SyntaxError> {
        let who = self.ident()?;
        self.expect(Tok::ColonColon)?;
        Ok((who, self.proc()?))
    }

    fn queue(&mut self) -> Result<Vec<Message>, SyntaxError> {
        self.expect(Tok::LBracket)?;
        let mut msgs = Vec::new();
        if *self.peek() == Tok::RBracket {
            self.next();
            return Ok(msgs);
        }
        loop {
            self.expect(Tok::Lt)?;
            let sender = self.ident()?;
            self.expect(Tok::Comma)?;
            let tag = self.ident()?;
            self.expect(Tok::Comma)?;
            let receiver = self.ident()?;
            self.expect(Tok::Gt)?;
            msgs.push(Message::new(sender.name.as_str(), tag.name.as_str(), receiver.name.as_str()));
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RBracket => {
                    self.next();
                    return Ok(msgs);
                }
                _ => return self.error("`,` or `]`"),
            }
        }
    }

    /// A reference in term position; keywords are not names.
    fn reference(&mut self) -> Result<Ident, SyntaxError> {
        let id = self.ident()?;
        if is_keyword(&id.name) {
            return Err(SyntaxError::Syntax {
                line: id.pos.line,
                col: id.pos.col,
                msg: format!("unexpected keyword `{}`", id.name),
            });
        }
        Ok(id)
    }

    fn sum<T>(&mut self, term: fn(&mut Self) -> Result<Term<T>, SyntaxError>) -> Result<Term<T>, SyntaxError> {
        let start = self.pos();
        let first = term(self)?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut branches = Vec::new();
        let mut push = |t: Term<T>, at: Pos| match t {
            Term::Sum(bs) => {
                branches.extend(bs);
                Ok(())
            }
            Term::End | Term::Ref(_) => Err(SyntaxError::Syntax {
                line: at.line,
                col: at.col,
                msg: "every summand must start with an action prefix".into(),
            }),
        };
        push(first, start)?;
        while *self.peek() == Tok::Plus {
            self.next();
            let at = self.pos();
            let t = term(self)?;
            push(t, at)?;
        }
        Ok(Term::Sum(branches))
    }

    fn proc(&mut self) -> Result<ProcTerm, SyntaxError> {
        Ok(match self.sum(Self::proc_term)? {
            Term::End => ProcTerm::End,
            Term::Ref(id) => ProcTerm::Ref(id),
            Term::Sum(branches) => ProcTerm::Sum(branches),
        })
    }

    fn proc_term(&mut self) -> Result<Term<(Prefix, Pos, ProcTerm)>, SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.next();
            let inner = self.sum(Self::proc_term)?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        if matches!(self.peek_at(1), Tok::Bang | Tok::Quest) {
            let pos = self.pos();
            let peer = self.ident()?;
            let kind = if self.next().0 == Tok::Bang { Kind::Output } else { Kind::Input };
            let tag = self.ident()?;
            self.expect(Tok::Dot)?;
            let cont = self.proc_cont()?;
            let prefix = Prefix { kind, peer: peer.name.as_str().into(), tag: tag.name.as_str().into() };
            return Ok(Term::Sum(vec![(prefix, pos, cont)]));
        }
        if self.at_keyword("end") {
            self.next();
            return Ok(Term::End);
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            return Ok(Term::Ref(self.reference()?));
        }
        self.error("a process")
    }

    /// Continuation after `prefix .`: binds tighter than `+`.
    fn proc_cont(&mut self) -> Result<ProcTerm, SyntaxError> {
        Ok(match self.proc_term()? {
            Term::End => ProcTerm::End,
            Term::Ref(id) => ProcTerm::Ref(id),
            Term::Sum(branches) => ProcTerm::Sum(branches),
        })
    }

    fn gtype(&mut self) -> Result<GlobalTerm, SyntaxError> {
        Ok(match self.sum(Self::g_term)? {
            Term::End => GlobalTerm::End,
            Term::Ref(id) => GlobalTerm::Ref(id),
            Term::Sum(branches) => GlobalTerm::Sum(branches),
        })
    }

    fn g_term(&mut self) -> Result<Term<(CommLabel, Pos, GlobalTerm)>, SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.next();
            let inner = self.sum(Self::g_term)?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        if matches!(self.peek(), Tok::Ident(_))
            && matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Bang | Tok::Quest)
        {
            let pos = self.pos();
            let player = self.ident()?;
            let partner = self.ident()?;
            let kind = if self.next().0 == Tok::Bang { Kind::Output } else { Kind::Input };
            let tag = self.ident()?;
            self.expect(Tok::Dot)?;
            let cont = self.g_cont()?;
            let label = CommLabel {
                kind,
                player: player.name.as_str().into(),
                partner: partner.name.as_str().into(),
                tag: tag.name.as_str().into(),
            };
            return Ok(Term::Sum(vec![(label, pos, cont)]));
        }
        if self.at_keyword("End") {
            self.next();
            return Ok(Term::End);
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            return Ok(Term::Ref(self.reference()?));
        }
        self.error("a global type")
    }

    fn g_cont(&mut self) -> Result<GlobalTerm, SyntaxError> {
        Ok(match self.g_term()? {
            Term::End => GlobalTerm::End,
            Term::Ref(id) => GlobalTerm::Ref(id),
            Term::Sum(branches) => GlobalTerm::Sum(branches),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminated_process() {
        let p = parse_program("participant P = end").unwrap();
        assert_eq!(p.decls.len(), 1);
        assert!(matches!(&p.decls[0], Decl::Process { body: ProcTerm::End, .. }));
    }

    #[test]
    fn prefix_binds_tighter_than_sum() {
        let p = parse_program("participant Q = c?req . c!res . Q + c!halt . c?req . c!res . end").unwrap();
        let Decl::Process { body: ProcTerm::Sum(branches), .. } = &p.decls[0] else { panic!() };
        assert_eq!(branches.len(), 2);
        assert_eq!(branches[0].0, Prefix::input("c", "req"));
        assert_eq!(branches[1].0, Prefix::output("c", "halt"));
    }

    #[test]
    fn parenthesised_sums_flatten() {
        let p = parse_program("participant P = (a!x . end + b!y . end) + c?z . end").unwrap();
        let Decl::Process { body: ProcTerm::Sum(branches), .. } = &p.decls[0] else { panic!() };
        assert_eq!(branches.len(), 3);
    }

    #[test]
    fn global_and_session() {
        let text = "global G = c s ! req . s c ? req . G\n\
                    session S = c :: s!req . end || s :: c?req . end with [<p, l, q>, <q, m, p>]";
        let p = parse_program(text).unwrap();
        let Decl::Global { body: GlobalTerm::Sum(b), .. } = &p.decls[0] else { panic!() };
        assert_eq!(b[0].0, CommLabel::output("c", "s", "req"));
        let Decl::Session { network, queue, .. } = &p.decls[1] else { panic!() };
        assert_eq!(network.len(), 2);
        assert_eq!(queue, &vec![Message::new("p", "l", "q"), Message::new("q", "m", "p")]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_program("participant P = q!l .\n").unwrap_err();
        assert!(matches!(err, SyntaxError::Syntax { line: 2, col: 1, .. }), "{err:?}");
        let err = parse_program("participant P = end + q!l . end").unwrap_err();
        assert!(matches!(err, SyntaxError::Syntax { line: 1, col: 17, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_definitions() {
        let err = parse_program("participant P = end\nglobal P = End").unwrap_err();
        assert!(matches!(err, SyntaxError::DuplicateDefinition { line: 2, .. }));
    }
}
