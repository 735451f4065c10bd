//! Structural validation and the per-family information/spatial predicates.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use super::file::duplicate_names;
use super::world::visible_set;
use super::{Family, ItemId, Role, Scenario, ScenarioError};

/// A family predicate that does not hold for a scenario.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unrealizable {family} scenario `{scenario}`: {clause}")]
pub struct Unrealizable {
    pub scenario: String,
    pub family: Family,
    pub clause: String,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

fn is_reserved(s: &str) -> bool {
    // location objects are emitted as loc0, loc1, ...
    s.strip_prefix("loc")
        .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
}

pub fn validate_structure(sc: &Scenario) -> Result<(), ScenarioError> {
    let bad = |m: String| Err(ScenarioError::Invalid(m));
    let s = &sc.initial;
    let n = s.locations.len();
    if n == 0 {
        return bad("no locations".into());
    }
    for name in sc.object_names() {
        if !is_identifier(name) || is_reserved(name) {
            return bad(format!(
                "`{name}` is not a valid object name (lowercase letter, then [a-z0-9_-]; loc<N> is reserved)"
            ));
        }
    }
    if let Some(d) = duplicate_names(sc.object_names()) {
        return bad(format!("duplicate object name `{d}`"));
    }
    let placed = s.all_items();
    let mut uniq = BTreeSet::new();
    for id in &placed {
        if !uniq.insert(id) {
            return bad(format!("item `{id}` placed more than once"));
        }
        if sc.item(id).is_none() {
            return bad(format!("item `{id}` placed but not declared"));
        }
    }
    for it in &sc.items {
        if !uniq.contains(&it.id) {
            return bad(format!("item `{}` declared but never placed", it.id));
        }
    }
    if s.holding.is_some() {
        return bad("matcher cannot start holding an item".into());
    }
    if sc.item(&sc.target).is_none() {
        return bad(format!("target `{}` is not a declared item", sc.target));
    }
    if let Some(d) = &sc.distractor {
        if sc.item(d).is_none() {
            return bad(format!("distractor `{d}` is not a declared item"));
        }
        if *d == sc.target {
            return bad("distractor and target are the same item".into());
        }
    }
    for (role, facing) in [(Role::Director, s.director.facing), (Role::Matcher, s.matcher.facing)] {
        if facing >= n {
            return bad(format!("{role} faces location {facing} but the row has {n}"));
        }
        for &m in s.occlusion.for_role(role) {
            if m >= n {
                return bad(format!("{role} occlusion mask names location {m} outside the row"));
            }
        }
    }
    // The Director never moves, so its mask must lie inside its own ±1
    // envelope and never cover the location it faces.
    let env = visible_set(s.director.facing, n, &BTreeSet::new());
    for &m in &s.occlusion.director {
        if !env.contains(&m) || m == s.director.facing {
            return bad(format!(
                "director occlusion mask entry {m} is outside its adjacency envelope"
            ));
        }
    }
    if s.director.mobile || !s.matcher.mobile {
        return bad("only the matcher is mobile".into());
    }
    Ok(())
}

struct Ctx<'a> {
    sc: &'a Scenario,
    failures: Option<String>,
}

impl Ctx<'_> {
    fn require(&mut self, ok: bool, clause: &str) {
        if !ok && self.failures.is_none() {
            self.failures = Some(String::from(clause));
        }
    }

    fn item_loc(&self, id: &ItemId) -> Option<usize> {
        self.sc.initial.location_of(id)
    }

    /// Item is at the location the Matcher faces (takeable without moving).
    fn close(&self, id: &ItemId) -> bool {
        self.item_loc(id) == Some(self.sc.initial.matcher.facing)
    }

    /// Item is within one step of the Matcher.
    fn within_reach(&self, id: &ItemId) -> bool {
        self.item_loc(id)
            .is_some_and(|l| l.abs_diff(self.sc.initial.matcher.facing) <= 1)
    }
}

/// Checks the information-state and spatial-state clauses of the
/// scenario's family against `observation_of` on the initial state.
/// Scenarios without a family pass trivially.
pub fn check_family_predicates(sc: &Scenario) -> Result<(), Unrealizable> {
    let Some(family) = sc.family else {
        return Ok(());
    };
    let s = &sc.initial;
    let m = s.observation_of(Role::Matcher);
    let d = s.observation_of(Role::Director);
    let t = &sc.target;
    let mv = &m.visible_locations;
    let dv = &d.visible_locations;
    let each_sees_other_cant = !mv.is_subset(dv) && !dv.is_subset(mv);
    let matcher_one_more = mv.len() == dv.len() + 1 && dv.is_subset(mv);
    let mut cx = Ctx {
        sc,
        failures: None,
    };

    let Some(x) = sc.distractor.clone() else {
        if family == Family::Hidd {
            cx.require(d.sees(t), "Director sees target");
            cx.require(!m.sees(t), "Matcher does not see target");
            cx.require(
                !m.items
                    .iter()
                    .filter_map(|s| sc.item(&s.item))
                    .any(|it| it.category == sc.target_item().category),
                "Matcher sees no item of the target's category",
            );
            cx.require(each_sees_other_cant, "each sees an area the other can't");
            cx.require(!cx.close(t), "Matcher distant from target");
        } else {
            cx.require(false, "family requires a distractor");
        }
        return finish(sc, family, cx.failures);
    };
    let x = &x;
    let same_kind = sc
        .item(x)
        .is_some_and(|it| it.category == sc.target_item().category);
    cx.require(same_kind, "distractor shares the target's category");

    match family {
        Family::Base => {
            cx.require(m.sees(t) && m.sees(x), "Matcher sees both objects");
            cx.require(d.sees(t) && d.sees(x), "Director sees both objects");
            cx.require(mv == dv, "both see the same areas");
            cx.require(
                sc.utterance.matches(sc.target_item())
                    && !sc.utterance.matches(sc.item(x).expect("validated")),
                "Director names the target explicitly",
            );
            cx.require(!cx.close(t) && !cx.close(x), "Matcher distant from both");
        }
        Family::Persp => {
            cx.require(m.sees(t) && m.sees(x), "Matcher sees both objects");
            cx.require(d.sees(t) && !d.sees(x), "Director sees only the target");
            cx.require(
                dv.len() + 1 == mv.len(),
                "Director sees one area less",
            );
            cx.require(
                cx.close(t) && cx.within_reach(x),
                "Matcher close to both target and distractor",
            );
        }
        Family::Dist => {
            cx.require(m.sees(x) && !m.sees(t), "Matcher sees distractor");
            cx.require(d.sees(t) && !d.sees(x), "Director sees target");
            cx.require(each_sees_other_cant, "each sees an area the other can't");
            cx.require(!cx.close(t) && cx.close(x), "distant from target, close to distractor");
        }
        Family::Near => {
            cx.require(m.sees(t) && m.sees(x), "Matcher sees both objects");
            cx.require(d.sees(t) && d.sees(x), "Director sees both objects");
            cx.require(matcher_one_more, "Matcher sees an area more");
            cx.require(cx.close(t) && !cx.close(x), "close to target, distant from distractor");
        }
        Family::Far => {
            cx.require(m.sees(t) && m.sees(x), "Matcher sees both objects");
            cx.require(d.sees(t) && d.sees(x), "Director sees both objects");
            cx.require(matcher_one_more, "Matcher sees an area more");
            cx.require(!cx.close(t) && cx.close(x), "close to distractor, distant from target");
        }
        Family::Not => {
            cx.require(m.sees(x) && !m.sees(t), "Matcher sees only the distractor");
            cx.require(d.sees(t) && d.sees(x), "Director sees both objects");
            cx.require(each_sees_other_cant, "each sees an area the other can't");
            cx.require(!cx.close(t) && cx.close(x), "close to distractor, distant from target");
        }
        Family::Hidd => cx.require(false, "Hidden scenarios have no distractor"),
    }
    finish(sc, family, cx.failures)
}

fn finish(sc: &Scenario, family: Family, failure: Option<String>) -> Result<(), Unrealizable> {
    match failure {
        None => Ok(()),
        Some(clause) => Err(Unrealizable {
            scenario: sc.id.clone(),
            family,
            clause,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{reference_pack, reference_scenario, ScenarioFile};

    #[test]
    fn reference_pack_satisfies_every_family() {
        for sc in reference_pack() {
            validate_structure(&sc).unwrap();
            check_family_predicates(&sc).unwrap();
        }
    }

    #[test]
    fn moving_the_matcher_breaks_persp() {
        let mut sc = reference_scenario(Family::Persp);
        sc.initial.matcher.facing = 2;
        let err = check_family_predicates(&sc).unwrap_err();
        assert_eq!(err.family, Family::Persp);
    }

    #[test]
    fn director_mask_outside_envelope_rejected() {
        let mut f = ScenarioFile::from_scenario(&reference_scenario(Family::Dist));
        f.poses.director = 0;
        f.occlusion_masks.director = alloc::vec![2];
        assert!(matches!(f.into_scenario(), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn duplicate_and_reserved_names_rejected() {
        let mut f = ScenarioFile::from_scenario(&reference_scenario(Family::Base));
        f.items[0].id = "loc3".into();
        assert!(f.into_scenario().is_err());
        let mut f = ScenarioFile::from_scenario(&reference_scenario(Family::Base));
        f.locations[0].surface_items.push(f.items[1].id.clone());
        assert!(f.into_scenario().is_err());
    }
}
