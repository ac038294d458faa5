//! Action prefixes, communication labels and messages.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::name::{Participant, Tag};

/// Direction of an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Output,
    Input,
}

impl Kind {
    pub fn symbol(self) -> char {
        match self {
            Kind::Output => '!',
            Kind::Input => '?',
        }
    }
}

/// A process prefix `q!λ` or `q?λ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix {
    pub kind: Kind,
    pub peer: Participant,
    pub tag: Tag,
}

impl Prefix {
    pub fn output(peer: impl Into<Participant>, tag: impl Into<Tag>) -> Self {
        Prefix { kind: Kind::Output, peer: peer.into(), tag: tag.into() }
    }

    pub fn input(peer: impl Into<Participant>, tag: impl Into<Tag>) -> Self {
        Prefix { kind: Kind::Input, peer: peer.into(), tag: tag.into() }
    }

    /// The communication label this prefix produces when fired by `player`.
    pub fn as_label(&self, player: &Participant) -> CommLabel {
        CommLabel { kind: self.kind, player: player.clone(), partner: self.peer.clone(), tag: self.tag.clone() }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.peer, self.kind.symbol(), self.tag)
    }
}

/// A decorated communication action.
///
/// `pq!λ` means player `p` sends `λ` to partner `q`; `pq?λ` means player `p`
/// reads from the queue the tag `λ` sent by partner `q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommLabel {
    pub kind: Kind,
    pub player: Participant,
    pub partner: Participant,
    pub tag: Tag,
}

impl CommLabel {
    pub fn output(player: impl Into<Participant>, partner: impl Into<Participant>, tag: impl Into<Tag>) -> Self {
        CommLabel { kind: Kind::Output, player: player.into(), partner: partner.into(), tag: tag.into() }
    }

    pub fn input(player: impl Into<Participant>, partner: impl Into<Participant>, tag: impl Into<Tag>) -> Self {
        CommLabel { kind: Kind::Input, player: player.into(), partner: partner.into(), tag: tag.into() }
    }

    pub fn is_output(&self) -> bool {
        self.kind == Kind::Output
    }

    /// The prefix the player must offer to fire this label.
    pub fn prefix(&self) -> Prefix {
        Prefix { kind: self.kind, peer: self.partner.clone(), tag: self.tag.clone() }
    }

    /// The message pushed (output) or pulled (input) by this label.
    pub fn message(&self) -> Message {
        match self.kind {
            Kind::Output => {
                Message { sender: self.player.clone(), tag: self.tag.clone(), receiver: self.partner.clone() }
            }
            Kind::Input => {
                Message { sender: self.partner.clone(), tag: self.tag.clone(), receiver: self.player.clone() }
            }
        }
    }

    /// Rendering used for DOT edges: `p->q!t` / `p<-q?t`.
    pub fn dot_string(&self) -> String {
        match self.kind {
            Kind::Output => format!("{}->{}!{}", self.player, self.partner, self.tag),
            Kind::Input => format!("{}<-{}?{}", self.player, self.partner, self.tag),
        }
    }

    /// Rendering in the DSL: `p q ! t`.
    pub fn dsl_string(&self) -> String {
        format!("{} {} {} {}", self.player, self.partner, self.kind.symbol(), self.tag)
    }
}

/// Trace-literal rendering, `p>q!t` for outputs and `p<q?t` for inputs.
impl fmt::Display for CommLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Output => write!(f, "{}>{}!{}", self.player, self.partner, self.tag),
            Kind::Input => write!(f, "{}<{}?{}", self.player, self.partner, self.tag),
        }
    }
}

impl fmt::Debug for CommLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for CommLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed label `{literal}`: expected `p>q!t` or `p<q?t`")]
pub struct LabelParseError {
    pub literal: String,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for CommLabel {
    type Err = LabelParseError;

    fn from_str(literal: &str) -> Result<Self, Self::Err> {
        let err = || LabelParseError { literal: literal.to_string() };
        let s = literal.trim();
        let (kind, sep, mark) = if s.contains('>') {
            (Kind::Output, '>', '!')
        } else if s.contains('<') {
            (Kind::Input, '<', '?')
        } else {
            return Err(err());
        };
        let (player, rest) = s.split_once(sep).ok_or_else(err)?;
        let (partner, tag) = rest.split_once(mark).ok_or_else(err)?;
        let (player, partner, tag) = (player.trim(), partner.trim(), tag.trim());
        if !(is_ident(player) && is_ident(partner) && is_ident(tag)) {
            return Err(err());
        }
        Ok(CommLabel { kind, player: player.into(), partner: partner.into(), tag: tag.into() })
    }
}

/// Parses a comma-separated trace literal such as `c>s!req,s<c?req`.
pub fn parse_trace(literal: &str) -> Result<Vec<CommLabel>, LabelParseError> {
    if literal.trim().is_empty() {
        return Ok(Vec::new());
    }
    literal.split(',').map(str::parse).collect()
}

/// A queued message `<sender, tag, receiver>`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub sender: Participant,
    pub tag: Tag,
    pub receiver: Participant,
}

impl Message {
    pub fn new(sender: impl Into<Participant>, tag: impl Into<Tag>, receiver: impl Into<Participant>) -> Self {
        Message { sender: sender.into(), tag: tag.into(), receiver: receiver.into() }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.sender, self.tag, self.receiver)
    }
}

impl fmt::Debug for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Message {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
