//! JSON serialization for EPTs and augmented EPTs.
//!
//! A node is one of
//! `{"edge":[u,v],"left":<node>,"right":<node>}`, `{"vertex":v}`, or
//! `{"subdiv":<node>}`.
//!
//! Both the writer and the reader are iterative with explicit stacks: a
//! caterpillar over 2^20 vertices nests a million objects deep, far past any
//! recursion limit. The writer emits keys in the fixed order above with no
//! whitespace, so equal trees serialize to equal bytes; the reader accepts
//! keys in any order.

use crate::aug::{AugNode, AugTree};
use crate::ept::{Ept, EptNode, NodeId};
use crate::error::JsonError;
use crate::tree::{EdgeRef, VertexId};

enum Tok {
    Node(NodeId),
    Text(&'static str),
}

pub fn ept_to_json(t: &Ept) -> String {
    let mut out = String::new();
    let mut stack = vec![Tok::Node(t.root())];
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Text(s) => out.push_str(s),
            Tok::Node(id) => match *t.node(id) {
                EptNode::Leaf(v) => {
                    out.push_str("{\"vertex\":");
                    push_u32(&mut out, v.0);
                    out.push('}');
                }
                EptNode::Internal { edge, left, right } => {
                    out.push_str("{\"edge\":[");
                    push_u32(&mut out, edge.u().0);
                    out.push(',');
                    push_u32(&mut out, edge.v().0);
                    out.push_str("],\"left\":");
                    stack.push(Tok::Text("}"));
                    stack.push(Tok::Node(right));
                    stack.push(Tok::Text(",\"right\":"));
                    stack.push(Tok::Node(left));
                }
            },
        }
    }
    out
}

pub fn aug_to_json(a: &AugTree) -> String {
    let mut out = String::new();
    let mut stack = vec![Tok::Node(a.root())];
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Text(s) => out.push_str(s),
            Tok::Node(id) => match *a.node(id) {
                AugNode::Leaf(v) => {
                    out.push_str("{\"vertex\":");
                    push_u32(&mut out, v.0);
                    out.push('}');
                }
                AugNode::Internal { edge, left, right } => {
                    out.push_str("{\"edge\":[");
                    push_u32(&mut out, edge.u().0);
                    out.push(',');
                    push_u32(&mut out, edge.v().0);
                    out.push_str("],\"left\":");
                    stack.push(Tok::Text("}"));
                    stack.push(Tok::Node(right));
                    stack.push(Tok::Text(",\"right\":"));
                    stack.push(Tok::Node(left));
                }
                AugNode::Subdiv { child } => {
                    out.push_str("{\"subdiv\":");
                    stack.push(Tok::Text("}"));
                    stack.push(Tok::Node(child));
                }
            },
        }
    }
    out
}

fn push_u32(out: &mut String, x: u32) {
    let mut buf = [0u8; 10];
    let mut i = buf.len();
    let mut x = x;
    loop {
        i -= 1;
        buf[i] = b'0' + (x % 10) as u8;
        x /= 10;
        if x == 0 {
            break;
        }
    }
    out.push_str(std::str::from_utf8(&buf[i..]).unwrap());
}

pub fn ept_from_json(text: &str) -> Result<Ept, JsonError> {
    let (raw, root) = parse_raw(text)?;
    let mut nodes = Vec::with_capacity(raw.len());
    for node in raw {
        nodes.push(match node {
            RawNode::Leaf(v) => EptNode::Leaf(v),
            RawNode::Internal { edge, left, right } => EptNode::Internal { edge, left, right },
            RawNode::Subdiv { .. } => return Err(JsonError::UnexpectedSubdiv),
        });
    }
    Ok(Ept::from_parts(nodes, root))
}

pub fn aug_from_json(text: &str) -> Result<AugTree, JsonError> {
    let (raw, root) = parse_raw(text)?;
    let nodes = raw
        .into_iter()
        .map(|node| match node {
            RawNode::Leaf(v) => AugNode::Leaf(v),
            RawNode::Internal { edge, left, right } => AugNode::Internal { edge, left, right },
            RawNode::Subdiv { child } => AugNode::Subdiv { child },
        })
        .collect();
    Ok(AugTree::from_raw(nodes, root))
}

enum RawNode {
    Leaf(VertexId),
    Internal {
        edge: EdgeRef,
        left: NodeId,
        right: NodeId,
    },
    Subdiv {
        child: NodeId,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ChildKey {
    Left,
    Right,
    Subdiv,
}

#[derive(Default)]
struct Frame {
    at: usize,
    vertex: Option<u64>,
    edge: Option<(u64, u64)>,
    left: Option<NodeId>,
    right: Option<NodeId>,
    subdiv: Option<NodeId>,
    pending: Option<ChildKey>,
}

impl Frame {
    fn assign_pending(&mut self, id: NodeId) {
        match self.pending.take().expect("no child expected here") {
            ChildKey::Left => self.left = Some(id),
            ChildKey::Right => self.right = Some(id),
            ChildKey::Subdiv => self.subdiv = Some(id),
        }
    }

    fn finish(self) -> Result<RawNode, JsonError> {
        let at = self.at;
        let err = |msg: &str| JsonError::Syntax {
            at,
            msg: msg.to_string(),
        };
        debug_assert!(self.pending.is_none());
        match (self.vertex, self.edge, self.left, self.right, self.subdiv) {
            (Some(v), None, None, None, None) => {
                let v = u32::try_from(v).map_err(|_| err("vertex index too large"))?;
                Ok(RawNode::Leaf(VertexId(v)))
            }
            (None, Some((u, v)), Some(left), Some(right), None) => {
                let u = u32::try_from(u).map_err(|_| err("vertex index too large"))?;
                let v = u32::try_from(v).map_err(|_| err("vertex index too large"))?;
                if u == v {
                    return Err(err("edge endpoints must differ"));
                }
                Ok(RawNode::Internal {
                    edge: EdgeRef::of(u, v),
                    left,
                    right,
                })
            }
            (None, None, None, None, Some(child)) => Ok(RawNode::Subdiv { child }),
            _ => Err(err(
                "node must be {\"vertex\":..}, {\"edge\":..,\"left\":..,\"right\":..}, or {\"subdiv\":..}",
            )),
        }
    }
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: &str) -> JsonError {
        JsonError::Syntax {
            at: self.at,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while matches!(self.b.get(self.at), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Result<u8, JsonError> {
        self.ws();
        self.b
            .get(self.at)
            .copied()
            .ok_or_else(|| self.err("unexpected end of input"))
    }

    fn next(&mut self) -> Result<u8, JsonError> {
        let c = self.peek()?;
        self.at += 1;
        Ok(c)
    }

    fn expect(&mut self, want: u8) -> Result<(), JsonError> {
        let got = self.next()?;
        if got != want {
            self.at -= 1;
            return Err(self.err(&format!("expected '{}'", want as char)));
        }
        Ok(())
    }

    fn number(&mut self) -> Result<u64, JsonError> {
        self.ws();
        let start = self.at;
        let mut value: u64 = 0;
        while let Some(&c) = self.b.get(self.at) {
            if !c.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u64))
                .ok_or_else(|| self.err("number out of range"))?;
            self.at += 1;
        }
        if self.at == start {
            return Err(self.err("expected a number"));
        }
        Ok(value)
    }

    /// Object keys only: plain ASCII strings, no escapes.
    fn key(&mut self) -> Result<&'a str, JsonError> {
        self.expect(b'"')?;
        let start = self.at;
        while let Some(&c) = self.b.get(self.at) {
            if c == b'"' {
                let s = std::str::from_utf8(&self.b[start..self.at])
                    .map_err(|_| self.err("key is not utf-8"))?;
                self.at += 1;
                return Ok(s);
            }
            if c == b'\\' {
                return Err(self.err("escapes are not supported in keys"));
            }
            self.at += 1;
        }
        Err(self.err("unterminated string"))
    }
}

fn parse_raw(text: &str) -> Result<(Vec<RawNode>, NodeId), JsonError> {
    let mut cur = Cursor {
        b: text.as_bytes(),
        at: 0,
    };
    let mut arena: Vec<RawNode> = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();

    cur.expect(b'{')?;
    frames.push(Frame {
        at: cur.at,
        ..Frame::default()
    });
    // `after_value` distinguishes "expect ',' or '}'" from "expect a first
    // key or an immediate '}'" within the current frame.
    let mut after_value = false;
    let root = loop {
        let close = if after_value {
            match cur.next()? {
                b',' => false,
                b'}' => true,
                _ => {
                    cur.at -= 1;
                    return Err(cur.err("expected ',' or '}'"));
                }
            }
        } else if cur.peek()? == b'}' {
            cur.at += 1;
            true
        } else {
            false
        };
        if close {
            let raw = frames.pop().unwrap().finish()?;
            if arena.len() > u32::MAX as usize {
                return Err(cur.err("too many nodes"));
            }
            let id = NodeId(arena.len() as u32);
            arena.push(raw);
            match frames.last_mut() {
                None => break id,
                Some(parent) => {
                    parent.assign_pending(id);
                    after_value = true;
                }
            }
            continue;
        }
        let key_at = cur.at;
        let key = cur.key()?;
        cur.expect(b':')?;
        let frame = frames.last_mut().unwrap();
        let dup = |at: usize| JsonError::Syntax {
            at,
            msg: format!("duplicate key \"{key}\""),
        };
        match key {
            "vertex" => {
                if frame.vertex.replace(cur.number()?).is_some() {
                    return Err(dup(key_at));
                }
                after_value = true;
            }
            "edge" => {
                cur.expect(b'[')?;
                let u = cur.number()?;
                cur.ws();
                cur.expect(b',')?;
                let v = cur.number()?;
                cur.ws();
                cur.expect(b']')?;
                if frame.edge.replace((u, v)).is_some() {
                    return Err(dup(key_at));
                }
                after_value = true;
            }
            "left" | "right" | "subdiv" => {
                let (slot_taken, child) = match key {
                    "left" => (frame.left.is_some(), ChildKey::Left),
                    "right" => (frame.right.is_some(), ChildKey::Right),
                    _ => (frame.subdiv.is_some(), ChildKey::Subdiv),
                };
                if slot_taken {
                    return Err(dup(key_at));
                }
                frame.pending = Some(child);
                cur.expect(b'{')?;
                frames.push(Frame {
                    at: cur.at,
                    ..Frame::default()
                });
                after_value = false;
            }
            other => {
                return Err(JsonError::Syntax {
                    at: key_at,
                    msg: format!("unknown key \"{other}\""),
                })
            }
        }
    };
    cur.ws();
    if cur.at != cur.b.len() {
        return Err(cur.err("trailing input after the root node"));
    }
    Ok((arena, root))
}
