//! Newick serialization with branch lengths.
//!
//! Node names are integers; a noisy-copy label `offset + i` renders as `ie`
//! (e.g. `3e`) when the tree carries its noisy offset. Unnamed internal
//! nodes get fresh labels on parse. The written form is rooted at the lowest
//! inner node.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tree::{noisy_offset_for, LabeledTree, NodeLabel};

fn render_label(label: NodeLabel, offset: Option<NodeLabel>) -> String {
    match offset {
        Some(off) if label >= off => format!("{}e", label - off),
        _ => label.to_string(),
    }
}

/// Writes a tree in Newick format, including inner-node names; branch
/// lengths are emitted when the tree has them.
pub fn write_newick(tree: &LabeledTree<f64>) -> String {
    let root = tree
        .inner_nodes()
        .first()
        .copied()
        .unwrap_or_else(|| tree.nodes().next().expect("tree is nonempty"));
    let mut out = String::new();
    write_node(tree, root, None, &mut out);
    out.push(';');
    out
}

/// Like [`write_newick`] but without inner-node names, for trees whose inner
/// labels carry no identity.
pub fn write_newick_anonymous(tree: &LabeledTree<f64>) -> String {
    let root = tree
        .inner_nodes()
        .first()
        .copied()
        .unwrap_or_else(|| tree.nodes().next().expect("tree is nonempty"));
    let mut out = String::new();
    write_node_anonymous(tree, root, None, &mut out);
    out.push(';');
    out
}

fn write_node(tree: &LabeledTree<f64>, v: NodeLabel, parent: Option<NodeLabel>, out: &mut String) {
    let children: Vec<NodeLabel> = tree.neighbors(v).filter(|&w| Some(w) != parent).collect();
    if !children.is_empty() {
        out.push('(');
        for (i, &c) in children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node(tree, c, Some(v), out);
        }
        out.push(')');
    }
    out.push_str(&render_label(v, tree.noisy_offset()));
    if let Some(p) = parent {
        if let Some(len) = tree.edge_length(p, v) {
            out.push(':');
            out.push_str(&format!("{len}"));
        }
    }
}

fn write_node_anonymous(
    tree: &LabeledTree<f64>,
    v: NodeLabel,
    parent: Option<NodeLabel>,
    out: &mut String,
) {
    let children: Vec<NodeLabel> = tree.neighbors(v).filter(|&w| Some(w) != parent).collect();
    if !children.is_empty() {
        out.push('(');
        for (i, &c) in children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node_anonymous(tree, c, Some(v), out);
        }
        out.push(')');
    } else {
        out.push_str(&render_label(v, tree.noisy_offset()));
    }
    if let Some(p) = parent {
        if let Some(len) = tree.edge_length(p, v) {
            out.push(':');
            out.push_str(&format!("{len}"));
        }
    }
}

#[derive(Debug)]
struct ParsedNode {
    name: Option<(u64, bool)>, // (value, is_noisy)
    length: Option<f64>,
    children: Vec<ParsedNode>,
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            chars: s.chars().peekable(),
            pos: 0,
        }
    }

    fn bump(&mut self) -> Option<char> {
        self.pos += 1;
        self.chars.next()
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn fail(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at position {}", self.pos))
    }

    fn parse_node(&mut self) -> Result<ParsedNode> {
        self.skip_ws();
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            self.bump();
            loop {
                children.push(self.parse_node()?);
                self.skip_ws();
                match self.bump() {
                    Some(',') => continue,
                    Some(')') => break,
                    _ => return Err(self.fail("expected ',' or ')'")),
                }
            }
        }
        self.skip_ws();
        let name = self.parse_name()?;
        self.skip_ws();
        let length = if self.peek() == Some(':') {
            self.bump();
            Some(self.parse_number()?)
        } else {
            None
        };
        Ok(ParsedNode {
            name,
            length,
            children,
        })
    }

    fn parse_name(&mut self) -> Result<Option<(u64, bool)>> {
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().expect("peeked"));
        }
        if digits.is_empty() {
            // Reject non-integer names outright.
            if matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(self.fail("node names must be integers (optionally suffixed with 'e')"));
            }
            return Ok(None);
        }
        let value: u64 = digits
            .parse()
            .map_err(|_| self.fail("node label does not fit in u64"))?;
        let noisy = if self.peek() == Some('e') {
            self.bump();
            true
        } else {
            false
        };
        if matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            return Err(self.fail("unexpected characters after node name"));
        }
        Ok(Some((value, noisy)))
    }

    fn parse_number(&mut self) -> Result<f64> {
        let mut s = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || "+-.eE".contains(c)) {
            s.push(self.bump().expect("peeked"));
        }
        s.parse()
            .map_err(|_| self.fail("malformed branch length"))
    }
}

/// Parses a Newick string into a labeled tree. Integer names become node
/// labels; `Ne` names land in the noisy namespace; unnamed nodes get fresh
/// labels above every named one. Missing branch lengths default to zero when
/// any edge carries one.
pub fn parse_newick(input: &str) -> Result<LabeledTree<f64>> {
    let mut parser = Parser::new(input.trim());
    let root = parser.parse_node()?;
    parser.skip_ws();
    match parser.bump() {
        Some(';') => {}
        _ => return Err(Error::Parse("expected trailing ';'".into())),
    }
    parser.skip_ws();
    if parser.peek().is_some() {
        return Err(Error::Parse("trailing characters after ';'".into()));
    }

    // Collect named labels to size the namespaces.
    fn scan(node: &ParsedNode, clean_max: &mut u64, noisy_max: &mut u64, any_noisy: &mut bool) {
        if let Some((value, noisy)) = node.name {
            if noisy {
                *any_noisy = true;
                *noisy_max = (*noisy_max).max(value);
            } else {
                *clean_max = (*clean_max).max(value);
            }
        }
        for c in &node.children {
            scan(c, clean_max, noisy_max, any_noisy);
        }
    }
    fn count(node: &ParsedNode) -> usize {
        1 + node.children.iter().map(count).sum::<usize>()
    }
    let (mut clean_max, mut noisy_max, mut any_noisy) = (0u64, 0u64, false);
    scan(&root, &mut clean_max, &mut noisy_max, &mut any_noisy);
    let fresh_budget = count(&root) as u64;
    // Fresh labels for unnamed nodes sit above every named clean label.
    let fresh_base = clean_max.max(noisy_max) + 1;
    let offset = noisy_offset_for(fresh_base + fresh_budget);

    struct Builder {
        nodes: BTreeSet<NodeLabel>,
        edges: Vec<(NodeLabel, NodeLabel, Option<f64>)>,
        next_fresh: u64,
        offset: u64,
    }
    impl Builder {
        fn label_of(&mut self, node: &ParsedNode) -> Result<NodeLabel> {
            let label = match node.name {
                Some((value, false)) => value,
                Some((value, true)) => self.offset + value,
                None => {
                    let l = self.next_fresh;
                    self.next_fresh += 1;
                    l
                }
            };
            if !self.nodes.insert(label) {
                return Err(Error::Parse(format!("duplicate node label {label}")));
            }
            Ok(label)
        }
        fn walk(&mut self, node: &ParsedNode, parent: Option<NodeLabel>) -> Result<()> {
            let label = self.label_of(node)?;
            if let Some(p) = parent {
                self.edges.push((p, label, node.length));
            }
            for c in &node.children {
                self.walk(c, Some(label))?;
            }
            Ok(())
        }
    }
    let mut b = Builder {
        nodes: BTreeSet::new(),
        edges: Vec::new(),
        next_fresh: fresh_base,
        offset,
    };
    b.walk(&root, None)?;

    let any_length = b.edges.iter().any(|e| e.2.is_some());
    let mut tree = if any_length {
        LabeledTree::with_lengths(
            b.nodes.iter().copied(),
            b.edges.iter().map(|&(u, v, l)| (u, v, l.unwrap_or(0.0))),
        )?
    } else {
        LabeledTree::new(b.nodes.iter().copied(), b.edges.iter().map(|&(u, v, _)| (u, v)))?
    };
    if any_noisy {
        tree.set_noisy_offset(Some(offset));
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_topology_and_lengths() {
        let t = LabeledTree::<f64>::with_lengths(
            1..=5,
            [(1, 2, 1.0), (1, 3, 0.5), (2, 4, 0.25), (2, 5, 2.0)],
        )
        .unwrap();
        let s = write_newick(&t);
        let back = parse_newick(&s).unwrap();
        assert!(back.same_topology(&t));
        for (u, v) in t.edges() {
            assert_eq!(back.edge_length(u, v), t.edge_length(u, v));
        }
    }

    #[test]
    fn writes_noisy_labels_with_suffix() {
        let t = LabeledTree::<f64>::new([1, 2], [(1, 2)]).unwrap().augment();
        let s = write_newick(&t);
        assert!(s.contains("1e"), "got {s}");
        let back = parse_newick(&s).unwrap();
        assert_eq!(back.leaves().len(), 2);
        let off = back.noisy_offset().unwrap();
        assert!(back.contains_edge(1, off + 1));
        assert!(back.contains_edge(2, off + 2));
    }

    #[test]
    fn parses_unnamed_inner_nodes() {
        let t = parse_newick("((1,2),(3,4));").unwrap();
        assert_eq!(t.leaves(), vec![1, 2, 3, 4]);
        assert_eq!(t.node_count(), 7);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_newick("((1,2)").is_err());
        assert!(parse_newick("(a,b);").is_err());
        assert!(parse_newick("(1,2);;").is_err());
        assert!(parse_newick("(1,1);").is_err());
    }

    #[test]
    fn anonymous_writer_drops_inner_names() {
        let t = LabeledTree::<f64>::new([1, 2, 3, 9], [(1, 9), (2, 9), (3, 9)]).unwrap();
        let s = write_newick_anonymous(&t);
        assert!(!s.contains('9'), "got {s}");
        let back = parse_newick(&s).unwrap();
        assert_eq!(back.leaves(), vec![1, 2, 3]);
    }
}
