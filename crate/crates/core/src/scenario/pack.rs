//! The seven reference scenarios, one per family.
//!
//! All use a three-location row (desk, shelf, cabinet). Objects are laid out
//! so that the planner-optimal `+ask` plans have the lengths and ask counts
//! of the baseline planner: Persp 1/0, Far 3/1, Hidd 2/0, Not 3/1, Dist 2/0,
//! Base 2/0, Near 2/1.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    ContainerSpec, Family, Item, LocationSpec, OcclusionSpec, PoseSpec, Scenario, ScenarioFile,
    UtteranceSpec,
};

fn item(id: &str, attribute: &str, category: &str) -> Item {
    Item {
        id: id.into(),
        category: category.into(),
        attribute: attribute.into(),
    }
}

fn locations(surface: [&[&str]; 3]) -> Vec<LocationSpec> {
    const LABELS: [&str; 3] = ["desk", "shelf", "cabinet"];
    surface
        .iter()
        .enumerate()
        .map(|(index, items)| LocationSpec {
            index,
            label: Some(LABELS[index].into()),
            surface_items: items.iter().map(|&s| s.into()).collect(),
        })
        .collect()
}

fn drawer(contents: &str) -> Vec<ContainerSpec> {
    vec![ContainerSpec {
        id: "drawer".into(),
        location: 2,
        contents: vec![contents.into()],
        is_open: false,
    }]
}

fn utterance(category: &str, attribute: Option<&str>) -> UtteranceSpec {
    let text = match attribute {
        Some(a) => alloc::format!("Please pass me the {a} {category}."),
        None => alloc::format!("Please pass me the {category}."),
    };
    UtteranceSpec {
        text,
        category: category.into(),
        attribute: attribute.map(String::from),
    }
}

fn masks(director: &[usize], matcher: &[usize]) -> OcclusionSpec {
    OcclusionSpec {
        director: director.to_vec(),
        matcher: matcher.to_vec(),
    }
}

/// Scenario file for one family.
pub fn reference_file(family: Family) -> ScenarioFile {
    let (locs, items, containers, poses, occl, target, distractor, utt) = match family {
        // Everyone sees everything; the request names the target.
        Family::Base => (
            locations([&["gold_shirt"], &[], &["silver_shirt"]]),
            vec![item("gold_shirt", "gold", "shirt"), item("silver_shirt", "silver", "shirt")],
            vec![],
            PoseSpec { director: 1, matcher: 1 },
            masks(&[], &[]),
            "gold_shirt",
            Some("silver_shirt"),
            utterance("shirt", Some("gold")),
        ),
        // Only the target is in common ground.
        Family::Persp => (
            locations([&["green_mug"], &["blue_mug"], &[]]),
            vec![
                item("blue_mug", "blue", "mug"),
                item("green_mug", "green", "mug"),
                item("spoon", "steel", "spoon"),
            ],
            drawer("spoon"),
            PoseSpec { director: 2, matcher: 1 },
            masks(&[], &[]),
            "blue_mug",
            Some("green_mug"),
            utterance("mug", None),
        ),
        Family::Dist => (
            locations([&["red_tie"], &["blue_tie"], &[]]),
            vec![
                item("red_tie", "red", "tie"),
                item("blue_tie", "blue", "tie"),
                item("belt", "brown", "belt"),
            ],
            drawer("belt"),
            PoseSpec { director: 0, matcher: 1 },
            masks(&[1], &[0]),
            "red_tie",
            Some("blue_tie"),
            utterance("tie", None),
        ),
        Family::Near => (
            locations([&["silver_shirt"], &["gold_shirt"], &[]]),
            vec![
                item("gold_shirt", "gold", "shirt"),
                item("silver_shirt", "silver", "shirt"),
                item("socks", "wool", "socks"),
            ],
            drawer("socks"),
            PoseSpec { director: 0, matcher: 1 },
            masks(&[], &[]),
            "gold_shirt",
            Some("silver_shirt"),
            utterance("shirt", None),
        ),
        Family::Far => (
            locations([&["gold_shirt"], &["silver_shirt"], &[]]),
            vec![
                item("gold_shirt", "gold", "shirt"),
                item("silver_shirt", "silver", "shirt"),
                item("scarf", "striped", "scarf"),
            ],
            drawer("scarf"),
            PoseSpec { director: 0, matcher: 1 },
            masks(&[], &[]),
            "gold_shirt",
            Some("silver_shirt"),
            utterance("shirt", None),
        ),
        Family::Hidd => (
            locations([&["green_book"], &["lamp"], &[]]),
            vec![
                item("green_book", "green", "book"),
                item("lamp", "white", "lamp"),
                item("scarf", "striped", "scarf"),
            ],
            drawer("scarf"),
            PoseSpec { director: 0, matcher: 1 },
            masks(&[], &[0]),
            "green_book",
            None,
            utterance("book", None),
        ),
        Family::Not => (
            locations([&["red_tie"], &["blue_tie"], &[]]),
            vec![
                item("red_tie", "red", "tie"),
                item("blue_tie", "blue", "tie"),
                item("belt", "brown", "belt"),
            ],
            drawer("belt"),
            PoseSpec { director: 0, matcher: 1 },
            masks(&[], &[0]),
            "red_tie",
            Some("blue_tie"),
            utterance("tie", None),
        ),
    };
    ScenarioFile {
        id: family.slug().into(),
        family: Some(family),
        locations: locs,
        items,
        containers,
        poses,
        occlusion_masks: occl,
        target_id: target.into(),
        distractor_id: distractor.map(Into::into),
        director_utterance: utt,
    }
}

pub fn reference_scenario(family: Family) -> Scenario {
    reference_file(family)
        .into_scenario()
        .expect("reference scenarios are structurally valid")
}

/// All seven families in table column order.
pub fn reference_pack() -> Vec<Scenario> {
    Family::ALL.iter().map(|&f| reference_scenario(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Role;

    #[test]
    fn ambiguity_follows_director_view() {
        let amb: Vec<(Family, bool)> = reference_pack()
            .iter()
            .map(|s| (s.family.unwrap(), s.initial.ambiguous))
            .collect();
        assert_eq!(
            amb,
            vec![
                (Family::Persp, false),
                (Family::Far, true),
                (Family::Hidd, false),
                (Family::Not, true),
                (Family::Dist, false),
                (Family::Base, false),
                (Family::Near, true),
            ]
        );
    }

    #[test]
    fn distractor_scenario_matcher_sees_distractor_not_target() {
        let sc = reference_scenario(Family::Dist);
        let m = sc.initial.observation_of(Role::Matcher);
        assert!(m.sees(sc.distractor.as_ref().unwrap()));
        assert!(!m.sees(&sc.target));
    }

    #[test]
    fn hidden_scenario_matcher_sees_no_book() {
        let sc = reference_scenario(Family::Hidd);
        let m = sc.initial.observation_of(Role::Matcher);
        assert!(m
            .items
            .iter()
            .all(|s| sc.item(&s.item).unwrap().category != "book"));
    }

    #[test]
    fn file_round_trip() {
        for sc in reference_pack() {
            let f = ScenarioFile::from_scenario(&sc);
            assert_eq!(f.clone().into_scenario().unwrap(), sc);
            assert_eq!(f, reference_file(sc.family.unwrap()));
        }
    }
}
