//! Message queues in canonical form.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::label::{CommLabel, Kind, Message};
use crate::name::{Participant, Tag};

/// One FIFO per ordered (sender, receiver) pair.
///
/// Messages on different pairs commute, so two queues are structurally
/// equivalent exactly when their per-pair FIFOs agree. Empty channels are
/// never stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Queue {
    channels: BTreeMap<(Participant, Participant), VecDeque<Tag>>,
}

impl Queue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_messages<I: IntoIterator<Item = Message>>(messages: I) -> Self {
        let mut q = Queue::new();
        for m in messages {
            q.push(m);
        }
        q
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn push(&mut self, m: Message) {
        self.channels.entry((m.sender, m.receiver)).or_default().push_back(m.tag);
    }

    pub fn head(&self, sender: &Participant, receiver: &Participant) -> Option<&Tag> {
        self.channels.get(&(sender.clone(), receiver.clone())).and_then(|c| c.front())
    }

    /// Removes the head of channel (sender, receiver) when it carries `tag`.
    pub fn pop_if(&mut self, sender: &Participant, receiver: &Participant, tag: &Tag) -> bool {
        let key = (sender.clone(), receiver.clone());
        let Some(channel) = self.channels.get_mut(&key) else {
            return false;
        };
        if channel.front() != Some(tag) {
            return false;
        }
        channel.pop_front();
        if channel.is_empty() {
            self.channels.remove(&key);
        }
        true
    }

    pub fn channels(&self) -> impl Iterator<Item = (&Participant, &Participant, &VecDeque<Tag>)> {
        self.channels.iter().map(|((s, r), c)| (s, r, c))
    }

    /// Every queued message, channel by channel, oldest first.
    pub fn messages(&self) -> impl Iterator<Item = Message> + '_ {
        self.channels.iter().flat_map(|((s, r), c)| {
            c.iter().map(move |t| Message { sender: s.clone(), tag: t.clone(), receiver: r.clone() })
        })
    }

    /// Head messages of all nonempty channels.
    pub fn heads(&self) -> impl Iterator<Item = Message> + '_ {
        self.channels.iter().map(|((s, r), c)| Message {
            sender: s.clone(),
            tag: c.front().expect("empty channel stored").clone(),
            receiver: r.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.channels.values().map(VecDeque::len).sum()
    }

    pub fn max_channel_len(&self) -> usize {
        self.channels.values().map(VecDeque::len).max().unwrap_or(0)
    }
}

/// `Λ(Q)`: outputs append to their channel, inputs consume a matching head.
/// Returns `None` when an input finds no matching head.
pub fn apply_label(label: &CommLabel, queue: &Queue) -> Option<Queue> {
    let mut q = queue.clone();
    match label.kind {
        Kind::Output => {
            q.push(label.message());
            Some(q)
        }
        Kind::Input => q.pop_if(&label.partner, &label.player, &label.tag).then_some(q),
    }
}

impl fmt::Display for Queue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, m) in self.messages().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Queue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_appends_to_channel() {
        let q = apply_label(&CommLabel::output("p", "q", "l"), &Queue::new()).unwrap();
        assert_eq!(q, Queue::from_messages([Message::new("p", "l", "q")]));
        assert_eq!(q.head(&"p".into(), &"q".into()).map(Tag::as_str), Some("l"));
    }

    #[test]
    fn input_consumes_matching_head() {
        let q = Queue::from_messages([Message::new("q", "l", "p")]);
        assert_eq!(apply_label(&CommLabel::input("p", "q", "l"), &q), Some(Queue::new()));
    }

    #[test]
    fn input_with_other_head_is_undefined() {
        let q = Queue::from_messages([Message::new("q", "l2", "p")]);
        assert_eq!(apply_label(&CommLabel::input("p", "q", "l"), &q), None);
        assert_eq!(apply_label(&CommLabel::input("p", "q", "l"), &Queue::new()), None);
    }

    #[test]
    fn crossing_messages_commute() {
        let a = Queue::from_messages([Message::new("p", "l", "q"), Message::new("q", "m", "p")]);
        let b = Queue::from_messages([Message::new("q", "m", "p"), Message::new("p", "l", "q")]);
        assert_eq!(a, b);
        let c = Queue::from_messages([Message::new("p", "l", "q"), Message::new("p", "m", "q")]);
        let d = Queue::from_messages([Message::new("p", "m", "q"), Message::new("p", "l", "q")]);
        assert_ne!(c, d);
    }
}
