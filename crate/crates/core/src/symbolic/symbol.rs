use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Role a symbol plays in a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Coordinate,
    Velocity,
    Momentum,
    Time,
    Parameter,
}

/// A named variable. Two symbols are equal when name and kind agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl Symbol {
    pub fn new(name: impl Into<Arc<str>>, kind: SymbolKind) -> Self {
        Symbol { name: name.into(), kind }
    }

    pub fn coordinate(name: &str) -> Self {
        Symbol::new(name, SymbolKind::Coordinate)
    }

    /// Velocity symbol of coordinate `x`: `x_dot`.
    pub fn velocity_of(coordinate: &str) -> Self {
        Symbol::new(velocity_name(coordinate), SymbolKind::Velocity)
    }

    /// Momentum symbol of coordinate `x`: `p_x`.
    pub fn momentum_of(coordinate: &str) -> Self {
        Symbol::new(momentum_name(coordinate), SymbolKind::Momentum)
    }

    pub fn time() -> Self {
        Symbol::new(TIME_NAME, SymbolKind::Time)
    }

    pub fn parameter(name: &str) -> Self {
        Symbol::new(name, SymbolKind::Parameter)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub const TIME_NAME: &str = "t";

pub fn velocity_name(coordinate: &str) -> String {
    format!("{coordinate}_dot")
}

pub fn momentum_name(coordinate: &str) -> String {
    format!("p_{coordinate}")
}

/// Name-indexed symbol registry used by the parser.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    symbols: BTreeMap<String, Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("symbol `{0}` is already registered")]
pub struct DuplicateSymbol(pub String);

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, symbol: Symbol) -> Result<(), DuplicateSymbol> {
        if self.symbols.contains_key(symbol.name()) {
            return Err(DuplicateSymbol(symbol.name().to_string()));
        }
        self.symbols.insert(symbol.name().to_string(), symbol);
        Ok(())
    }

    /// Registers `x`, `x_dot` and `p_x` for a coordinate.
    pub fn insert_coordinate(&mut self, name: &str) -> Result<(), DuplicateSymbol> {
        self.insert(Symbol::coordinate(name))?;
        self.insert(Symbol::velocity_of(name))?;
        self.insert(Symbol::momentum_of(name))
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }
}

impl FromIterator<Symbol> for SymbolTable {
    /// Later duplicates are ignored.
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        let mut table = SymbolTable::new();
        for s in iter {
            let _ = table.insert(s);
        }
        table
    }
}
