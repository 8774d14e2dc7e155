//! Minimal SVG writer. Coordinates are printed with two decimals so output
//! bytes depend only on the plotted values.

use std::fmt::Write as _;

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Two-decimal coordinate; `-0.00` becomes `0.00`.
pub fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
}

/// Attribute list builder: `attrs().n("x", 1.0).s("class", "bar")`.
#[derive(Default)]
pub struct Attrs(String);

pub fn attrs() -> Attrs {
    Attrs::default()
}

impl Attrs {
    pub fn n(mut self, key: &str, value: f64) -> Self {
        let _ = write!(self.0, " {key}=\"{}\"", num(value));
        self
    }

    pub fn s(mut self, key: &str, value: &str) -> Self {
        let _ = write!(self.0, " {key}=\"{}\"", escape(value));
        self
    }
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    pub fn empty(&mut self, tag: &str, a: Attrs) {
        let _ = writeln!(self.body, "<{tag}{}/>", a.0);
    }

    pub fn text(&mut self, a: Attrs, content: &str) {
        let _ = writeln!(self.body, "<text{}>{}</text>", a.0, escape(content));
    }

    pub fn open(&mut self, tag: &str, a: Attrs) {
        let _ = writeln!(self.body, "<{tag}{}>", a.0);
    }

    pub fn close(&mut self, tag: &str) {
        let _ = writeln!(self.body, "</{tag}>");
    }

    pub fn title(&mut self, content: &str) {
        let _ = writeln!(self.body, "<title>{}</title>", escape(content));
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], a: Attrs) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        self.empty("polyline", a.s("points", &pts.join(" ")).s("fill", "none"));
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n{}</svg>\n",
            self.body,
            w = num(self.width),
            h = num(self.height),
        )
    }
}
