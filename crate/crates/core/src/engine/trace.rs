//! One line per main-loop iteration: `iter ℓ |M| signature-hash event`.
//!
//! The event names what the iteration achieved, first match wins:
//! `swap` when the matching grew, `superpose` when a superpose-build was
//! kept, `collapse` when layers were collapsed without either, and `grow`
//! when the new layer stayed.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Grow,
    Swap,
    Superpose,
    Collapse,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Event::Grow => "grow",
            Event::Swap => "swap",
            Event::Superpose => "superpose",
            Event::Collapse => "collapse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceLine {
    pub iter: u64,
    pub ell: usize,
    pub matched: usize,
    pub signature_hash: u64,
    pub event: Event,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {:016x} {}",
            self.iter, self.ell, self.matched, self.signature_hash, self.event
        )
    }
}

pub fn render(lines: &[TraceLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
