use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::species::Species;
use crate::error::{Error, Result};

/// First-line marker every reaction-set file must carry.
pub const REACTION_SET_HEADER: &str = "# reaction-set v1";

const COLUMNS: [&str; 8] = [
    "id",
    "kind",
    "gas",
    "surface",
    "products",
    "s_or_gamma",
    "e_over_r",
    "site_order",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReactionKind {
    Adsorption,
    Desorption,
    EleyRideal,
    LangmuirHinshelwood,
    /// Data-driven reaction whose rate is supplied externally.
    Pseudo,
}

impl fmt::Display for ReactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ReactionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Adsorption" => Ok(Self::Adsorption),
            "Desorption" => Ok(Self::Desorption),
            "EleyRideal" => Ok(Self::EleyRideal),
            "LangmuirHinshelwood" => Ok(Self::LangmuirHinshelwood),
            "Pseudo" => Ok(Self::Pseudo),
            other => Err(Error::InvalidArgument(format!("unknown reaction kind `{other}`"))),
        }
    }
}

/// One gas-surface reaction row.
///
/// An Eley-Rideal row without a gas-phase reactant carries a lumped
/// pre-exponential factor: its `s_or_gamma` already includes the flux and
/// site-density scaling, so the rate law reduces to a plain Arrhenius form.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    id: String,
    kind: ReactionKind,
    gas_reactant: Option<Species>,
    surface_reactant: Option<Species>,
    products: Vec<(Species, u32)>,
    s_or_gamma: Option<f64>,
    e_over_r: Option<f64>,
    site_order: u8,
    lumped: bool,
}

impl Reaction {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        kind: ReactionKind,
        gas_reactant: Option<Species>,
        surface_reactant: Option<Species>,
        products: Vec<(Species, u32)>,
        s_or_gamma: Option<f64>,
        e_over_r: Option<f64>,
        site_order: u8,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidReaction {
            id: id.clone(),
            reason,
        };

        if kind == ReactionKind::Pseudo {
            if s_or_gamma.is_some() || e_over_r.is_some() {
                return Err(invalid("pseudo reactions take their rate externally".into()));
            }
        } else {
            match s_or_gamma {
                Some(v) if v.is_finite() && v >= 0.0 => {}
                other => return Err(invalid(format!("S or gamma must be >= 0, got {other:?}"))),
            }
            match e_over_r {
                Some(v) if v.is_finite() && v >= 0.0 => {}
                other => return Err(invalid(format!("E/R must be >= 0, got {other:?}"))),
            }
        }
        if !(1..=2).contains(&site_order) {
            return Err(invalid(format!("site order must be 1 or 2, got {site_order}")));
        }
        if site_order == 2 && gas_reactant != Some(Species::O2) {
            return Err(invalid("site order 2 is reserved for O2 adsorption".into()));
        }
        if let Some(g) = gas_reactant {
            if g.is_surface() {
                return Err(invalid(format!("{g} is not a gas-phase species")));
            }
        }
        match kind {
            ReactionKind::Adsorption if gas_reactant.is_none() => {
                return Err(invalid("adsorption needs a gas-phase reactant".into()));
            }
            ReactionKind::Desorption | ReactionKind::LangmuirHinshelwood => {
                if surface_reactant.and_then(Species::gas_counterpart).is_none() {
                    return Err(invalid(format!("{kind} needs an adsorbed atomic reactant")));
                }
            }
            _ => {}
        }

        let lumped = kind == ReactionKind::EleyRideal && gas_reactant.is_none();
        Ok(Self {
            id,
            kind,
            gas_reactant,
            surface_reactant,
            products,
            s_or_gamma,
            e_over_r,
            site_order,
            lumped,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn gas_reactant(&self) -> Option<Species> {
        self.gas_reactant
    }

    pub fn surface_reactant(&self) -> Option<Species> {
        self.surface_reactant
    }

    pub fn products(&self) -> &[(Species, u32)] {
        &self.products
    }

    /// Sticking probability or pre-exponential factor. `None` only for pseudo reactions.
    pub fn s_or_gamma(&self) -> Option<f64> {
        self.s_or_gamma
    }

    /// Activation temperature E/R in K. `None` only for pseudo reactions.
    pub fn e_over_r(&self) -> Option<f64> {
        self.e_over_r
    }

    pub fn site_order(&self) -> u8 {
        self.site_order
    }

    /// True when `s_or_gamma` is a lumped prefactor (no flux scaling).
    pub fn is_lumped(&self) -> bool {
        self.lumped
    }

    /// Gas species whose particle mass enters the rate law.
    pub fn rate_species(&self) -> Option<Species> {
        match self.kind {
            ReactionKind::Adsorption | ReactionKind::EleyRideal => self.gas_reactant,
            ReactionKind::Desorption | ReactionKind::LangmuirHinshelwood => {
                self.surface_reactant.and_then(Species::gas_counterpart)
            }
            ReactionKind::Pseudo => None,
        }
    }
}

/// An ordered, versioned collection of reactions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSet {
    description: String,
    reactions: Vec<Reaction>,
}

impl ReactionSet {
    /// Parses the reaction-set CSV format. `origin` only labels errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines();
        let first = lines.next().unwrap_or_default();
        let description = match first.strip_prefix(REACTION_SET_HEADER) {
            Some(rest) => rest.trim_start_matches(':').trim().to_string(),
            None => {
                return Err(Error::Schema {
                    path: origin.to_string(),
                    message: format!("missing version marker `{REACTION_SET_HEADER}` on line 1"),
                })
            }
        };
        let body_start = first.len() + 1;
        let body = text.get(body_start..).unwrap_or_default();

        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = reader.headers().map_err(|e| csv_error(e, origin, 1))?.clone();
        let mut index = [0usize; 8];
        for (slot, name) in index.iter_mut().zip(COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema {
                    path: origin.to_string(),
                    message: format!("missing column `{name}`"),
                })?;
        }

        let mut reactions = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(e, origin, 1))?;
            // +1 for the version line
            let line = record.position().map_or(0, |p| p.line() + 1);
            let field = |col: usize| record.get(index[col]).unwrap_or("");
            let parse_err = |col: usize, message: String| Error::Parse {
                path: origin.to_string(),
                line,
                column: index[col] + 1,
                message,
            };

            let kind: ReactionKind = field(1).parse().map_err(|e: Error| parse_err(1, e.to_string()))?;
            let optional_species = |col: usize| -> Result<Option<Species>> {
                let s = field(col);
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|e: Error| parse_err(col, e.to_string()))
                }
            };
            let gas = optional_species(2)?;
            let surface = optional_species(3)?;
            let products = parse_products(field(4)).map_err(|m| parse_err(4, m))?;
            let optional_number = |col: usize| -> Result<Option<f64>> {
                match field(col) {
                    "" | "-" => Ok(None),
                    s => s
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|e| parse_err(col, format!("`{s}`: {e}"))),
                }
            };
            let s_or_gamma = optional_number(5)?;
            let e_over_r = optional_number(6)?;
            let site_order: u8 = field(7)
                .parse()
                .map_err(|e| parse_err(7, format!("`{}`: {e}", field(7))))?;

            let reaction = Reaction::new(
                field(0),
                kind,
                gas,
                surface,
                products,
                s_or_gamma,
                e_over_r,
                site_order,
            )
            .map_err(|e| parse_err(0, e.to_string()))?;
            reactions.push(reaction);
        }

        Ok(Self {
            description,
            reactions,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The 20-reaction high-fidelity air-carbon mechanism.
    pub fn aca() -> &'static ReactionSet {
        static SET: OnceLock<ReactionSet> = OnceLock::new();
        SET.get_or_init(|| {
            Self::parse(include_str!("../../data/aca.csv"), "aca.csv").expect("bundled table")
        })
    }

    /// The 6-reaction reduction keeping only strongly bonded oxygen.
    pub fn reduced() -> &'static ReactionSet {
        static SET: OnceLock<ReactionSet> = OnceLock::new();
        SET.get_or_init(|| {
            Self::parse(include_str!("../../data/reduced.csv"), "reduced.csv")
                .expect("bundled table")
        })
    }

    /// The reduction plus two placeholder adsorptions and the pseudo-reaction.
    pub fn enriched() -> &'static ReactionSet {
        static SET: OnceLock<ReactionSet> = OnceLock::new();
        SET.get_or_init(|| {
            Self::parse(include_str!("../../data/enriched.csv"), "enriched.csv")
                .expect("bundled table")
        })
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn len(&self) -> usize {
        self.reactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reactions.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Reaction> {
        self.reactions.iter().find(|r| r.id == id)
    }

    /// Like [`get`](Self::get) but a missing row is an error.
    pub fn require(&self, id: &str) -> Result<&Reaction> {
        self.get(id).ok_or_else(|| Error::InvalidReaction {
            id: id.to_string(),
            reason: format!("not present in reaction set `{}`", self.description),
        })
    }
}

fn parse_products(field: &str) -> std::result::Result<Vec<(Species, u32)>, String> {
    field
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (name, count) = item
                .split_once(':')
                .ok_or_else(|| format!("product `{item}` is not `Species:count`"))?;
            let species: Species = name.parse().map_err(|e: Error| e.to_string())?;
            let count: u32 = count
                .trim()
                .parse()
                .map_err(|e| format!("product count `{count}`: {e}"))?;
            Ok((species, count))
        })
        .collect()
}

fn csv_error(err: csv::Error, origin: &str, line_offset: u64) -> Error {
    let line = err.position().map_or(0, |p| p.line() + line_offset);
    Error::Parse {
        path: origin.to_string(),
        line,
        column: 0,
        message: err.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(set: &ReactionSet) -> Vec<(String, Option<f64>, Option<f64>)> {
        set.reactions()
            .iter()
            .map(|r| (r.id().to_string(), r.s_or_gamma(), r.e_over_r()))
            .collect()
    }

    #[test]
    fn bundled_tables_have_expected_sizes() {
        assert_eq!(ReactionSet::aca().len(), 20);
        assert_eq!(ReactionSet::reduced().len(), 6);
        assert_eq!(ReactionSet::enriched().len(), 9);
    }

    #[test]
    fn aca_table_values() {
        let expected: [(f64, f64); 20] = [
            (0.3, 0.0),
            (1.0, 44277.0),
            (100.0, 4000.0),
            (1.0, 500.0),
            (0.7, 0.0),
            (1.0, 96500.0),
            (1000.0, 4000.0),
            (1e-3, 15000.0),
            (5e-5, 15000.0),
            (1.0, 2500.0),
            (1.0, 73971.0),
            (1.5, 7000.0),
            (0.5, 2000.0),
            (0.1, 21000.0),
            (1e8, 20676.0),
            (1.0, 8000.0),
            (100.0, 4000.0),
            (1.0, 500.0),
            (1.0, 8000.0),
            (1000.0, 4000.0),
        ];
        for (i, (id, s, e)) in values(ReactionSet::aca()).into_iter().enumerate() {
            assert_eq!(id, (i + 1).to_string());
            assert_eq!((s.unwrap(), e.unwrap()), expected[i], "row {id}");
        }
    }

    #[test]
    fn reduced_and_enriched_share_the_oxygen_rows() {
        let aca = ReactionSet::aca();
        for set in [ReactionSet::reduced(), ReactionSet::enriched()] {
            for id in ["5", "6", "7", "8", "19", "20"] {
                assert_eq!(set.get(id), aca.get(id), "row {id}");
            }
        }
        let enriched = ReactionSet::enriched();
        assert_eq!(enriched.get("1p").unwrap().s_or_gamma(), Some(0.3));
        assert_eq!(enriched.get("2p").unwrap().e_over_r(), Some(2500.0));
        let pseudo = enriched.get("3p").unwrap();
        assert_eq!(pseudo.kind(), ReactionKind::Pseudo);
        assert_eq!(pseudo.s_or_gamma(), None);
    }

    #[test]
    fn only_reaction_15_is_lumped() {
        let lumped: Vec<_> = ReactionSet::aca()
            .reactions()
            .iter()
            .filter(|r| r.is_lumped())
            .map(|r| r.id().to_string())
            .collect();
        assert_eq!(lumped, vec!["15"]);
    }

    #[test]
    fn o2_adsorption_uses_two_sites() {
        for r in ReactionSet::aca().reactions() {
            let expected = if r.kind() == ReactionKind::Adsorption && r.gas_reactant() == Some(Species::O2) {
                2
            } else {
                1
            };
            assert_eq!(r.site_order(), expected, "row {}", r.id());
        }
    }

    #[test]
    fn missing_version_marker_is_rejected() {
        let text = "id,kind,gas,surface,products,s_or_gamma,e_over_r,site_order\n";
        let err = ReactionSet::parse(text, "legacy.csv").unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
    }

    #[test]
    fn bad_number_reports_line_and_column() {
        let text = format!(
            "{REACTION_SET_HEADER}\nid,kind,gas,surface,products,s_or_gamma,e_over_r,site_order\n\
             1,Adsorption,O,FreeSite,O_s:1,0.3,0,1\n2,Desorption,,O_s,O:1,abc,1,1\n"
        );
        match ReactionSet::parse(&text, "t.csv").unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (4, 6)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn invariants_are_enforced() {
        let neg = Reaction::new(
            "x",
            ReactionKind::EleyRideal,
            Some(Species::O),
            Some(Species::O_s),
            vec![],
            Some(-1.0),
            Some(0.0),
            1,
        );
        assert!(neg.is_err());
        let order2 = Reaction::new(
            "y",
            ReactionKind::Adsorption,
            Some(Species::O),
            Some(Species::FreeSite),
            vec![],
            Some(1.0),
            Some(0.0),
            2,
        );
        assert!(order2.is_err());
        let pseudo_with_rate = Reaction::new(
            "z",
            ReactionKind::Pseudo,
            None,
            Some(Species::P_s),
            vec![],
            Some(1.0),
            None,
            1,
        );
        assert!(pseudo_with_rate.is_err());
    }
}
