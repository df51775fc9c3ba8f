//! Minimal Graphviz DOT writer. Every id and attribute value is quoted.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotNode {
    id: String,
    attrs: Vec<(String, String)>,
}

impl DotNode {
    pub fn new(id: impl Into<String>) -> Self {
        DotNode {
            id: id.into(),
            attrs: Vec::new(),
        }
    }

    pub fn attr(mut self, key: &str, value: impl AsRef<str>) -> Self {
        self.attrs.push((key.to_string(), value.as_ref().to_string()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DotEdge {
    from: String,
    to: String,
    attrs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotGraph {
    name: String,
    graph_attrs: Vec<(String, String)>,
    node_defaults: Vec<(String, String)>,
    nodes: Vec<DotNode>,
    edges: Vec<DotEdge>,
}

impl DotGraph {
    pub fn new(name: impl Into<String>) -> Self {
        DotGraph {
            name: name.into(),
            graph_attrs: Vec::new(),
            node_defaults: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn graph_attr(&mut self, key: &str, value: &str) -> &mut Self {
        self.graph_attrs.push((key.into(), value.into()));
        self
    }

    pub fn node_default(&mut self, key: &str, value: &str) -> &mut Self {
        self.node_defaults.push((key.into(), value.into()));
        self
    }

    pub fn node(&mut self, node: DotNode) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn edge(&mut self, from: impl Into<String>, to: impl Into<String>) -> &mut Self {
        self.labeled_edge(from, to, None)
    }

    pub fn labeled_edge(&mut self, from: impl Into<String>, to: impl Into<String>, label: Option<&str>) -> &mut Self {
        self.edges.push(DotEdge {
            from: from.into(),
            to: to.into(),
            attrs: label
                .map(|l| vec![("label".to_string(), l.to_string())])
                .unwrap_or_default(),
        });
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph {} {{", quote(&self.name)).unwrap();
        for (k, v) in &self.graph_attrs {
            writeln!(out, "  {k}={};", quote(v)).unwrap();
        }
        if !self.node_defaults.is_empty() {
            writeln!(out, "  node{};", attr_list(&self.node_defaults)).unwrap();
        }
        for node in &self.nodes {
            writeln!(out, "  {}{};", quote(&node.id), attr_list(&node.attrs)).unwrap();
        }
        for edge in &self.edges {
            writeln!(
                out,
                "  {} -> {}{};",
                quote(&edge.from),
                quote(&edge.to),
                attr_list(&edge.attrs)
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

fn attr_list(attrs: &[(String, String)]) -> String {
    if attrs.is_empty() {
        return String::new();
    }
    let body: Vec<String> = attrs.iter().map(|(k, v)| format!("{k}={}", quote(v))).collect();
    format!(" [{}]", body.join(", "))
}

/// Double-quoted DOT string with `"`, `\` and line breaks escaped.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes_special_characters() {
        assert_eq!(quote(r#"a "b" \c"#), r#""a \"b\" \\c""#);
        assert_eq!(quote("x\ny"), r#""x\ny""#);
    }

    #[test]
    fn renders_graph() {
        let mut g = DotGraph::new("g");
        g.graph_attr("rankdir", "LR");
        g.node(DotNode::new("a").attr("label", "A"));
        g.node(DotNode::new("b"));
        g.labeled_edge("a", "b", Some("then"));
        assert_eq!(
            g.render(),
            "digraph \"g\" {\n  rankdir=\"LR\";\n  \"a\" [label=\"A\"];\n  \"b\";\n  \"a\" -> \"b\" [label=\"then\"];\n}\n"
        );
    }
}
