//! Scenario files: order of battle, platform catalogue, radar parameters
//! and the conflict level, with full validation on load.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::SimError;
use tewa_core::agents::RadarConfig;
use tewa_core::threat::{
    classify_lethality, ConflictLevel, IffStatus, Lethality, PlatformCatalogue, TargetTrack,
    INTENT_CLASSES,
};
use tewa_core::wta::WeaponType;

/// One red-force group, tracked as a single target. Kinematics are a
/// straight-line constant-speed approach toward the defended asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedGroup {
    pub id: String,
    pub platform: String,
    pub count: u32,
    /// Initial position in arena coordinates, km.
    pub start_km: [f64; 2],
    pub altitude_km: f64,
    pub speed_mach: f64,
    /// Angle of attack is scenario-supplied per track.
    pub aoa_deg: f64,
    /// Intent evidence per class name; must sum to 1.
    pub intent: BTreeMap<String, f64>,
    /// IFF response code, if the group answers challenges at all.
    #[serde(default)]
    pub iff_response: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeaponEntry {
    pub id: String,
    pub inventory: u32,
    /// Weapons expended per engagement, by target platform kind.
    pub salvo: BTreeMap<String, u32>,
    /// Single-engagement kill probability, by target platform kind.
    pub kill_prob: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlueForce {
    pub iff_code: String,
    pub radar: RadarConfig,
    pub weapons: Vec<WeaponEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub arena_km: [f64; 2],
    pub defended_asset_km: [f64; 2],
    pub cl: f64,
    pub platforms: PlatformCatalogue,
    pub red_force: Vec<RedGroup>,
    pub blue_force: BlueForce,
}

/// Range, in km, at which the direction center starts prioritizing.
pub const ENGAGEMENT_RANGE_KM: f64 = 200.0;

/// Mach 1 at the simulation's reference conditions, km/s.
pub const MACH_KM_PER_S: f64 = 0.343;

impl Scenario {
    pub fn conflict_level(&self) -> ConflictLevel {
        ConflictLevel::new(self.cl).expect("validated on load")
    }

    /// Lethality of one group: catalogue class, upgraded to very lethal
    /// for a multi-ship group of fighters or bombers.
    pub fn group_lethality(&self, group: &RedGroup) -> Result<Lethality, SimError> {
        let base = classify_lethality(&self.platforms, &group.platform)?;
        Ok(if base == Lethality::Lethal && group.count > 1 {
            Lethality::VeryLethal
        } else {
            base
        })
    }

    pub fn intent_evidence(group: &RedGroup) -> [f64; 10] {
        let mut evidence = [0.0; 10];
        for (class, weight) in &group.intent {
            let idx = INTENT_CLASSES
                .iter()
                .position(|c| c == class)
                .expect("validated on load");
            evidence[idx] = *weight;
        }
        evidence
    }

    pub fn iff_status(&self, group: &RedGroup) -> IffStatus {
        tewa_core::threat::iff_classify(group.iff_response.as_deref(), &self.blue_force.iff_code)
    }

    pub fn weapon_types(&self, target_kinds: &[String]) -> Vec<WeaponType> {
        self.blue_force
            .weapons
            .iter()
            .map(|w| WeaponType {
                id: w.id.clone(),
                inventory: w.inventory,
                salvo: target_kinds.iter().map(|k| w.salvo[k]).collect(),
                kill_prob: target_kinds.iter().map(|k| w.kill_prob[k]).collect(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |path: &str, reason: String| Err(SimError::validation(path, reason));

        if !(self.arena_km[0] > 0.0 && self.arena_km[1] > 0.0) {
            return fail("arena_km", "arena extents must be positive".into());
        }
        for (axis, (pos, extent)) in self
            .defended_asset_km
            .iter()
            .zip(self.arena_km)
            .enumerate()
        {
            if !(0.0..=extent).contains(pos) {
                return fail(
                    "defended_asset_km",
                    format!("coordinate {axis} = {pos} outside the arena"),
                );
            }
        }
        if ConflictLevel::new(self.cl).is_none() {
            return fail("cl", format!("conflict level {} outside [0, 1]", self.cl));
        }
        if self.red_force.is_empty() {
            return fail("red_force", "red force must not be empty".into());
        }
        for (i, group) in self.red_force.iter().enumerate() {
            let path = format!("red_force[{i}]");
            if !self.platforms.contains_key(&group.platform) {
                return fail(&path, format!("unknown platform kind '{}'", group.platform));
            }
            if group.count == 0 {
                return fail(&path, "group count must be at least 1".into());
            }
            for (axis, (pos, extent)) in group.start_km.iter().zip(self.arena_km).enumerate() {
                if !(0.0..=extent).contains(pos) {
                    return fail(
                        &path,
                        format!("start coordinate {axis} = {pos} outside the arena"),
                    );
                }
            }
            if !(group.speed_mach.is_finite() && group.speed_mach >= 0.0) {
                return fail(&path, "speed must be finite and non-negative".into());
            }
            if !(group.altitude_km.is_finite() && group.altitude_km >= 0.0) {
                return fail(&path, "altitude must be finite and non-negative".into());
            }
            if !(0.0..=90.0).contains(&group.aoa_deg) {
                return fail(&path, format!("aoa {} outside [0, 90]", group.aoa_deg));
            }
            let mut sum = 0.0;
            for (class, weight) in &group.intent {
                if !INTENT_CLASSES.contains(&class.as_str()) {
                    return fail(&path, format!("unknown intent class '{class}'"));
                }
                if !(0.0..=1.0).contains(weight) {
                    return fail(&path, format!("intent weight {weight} outside [0, 1]"));
                }
                sum += weight;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return fail(&path, format!("intent evidence sums to {sum}, expected 1"));
            }
        }
        if self.blue_force.iff_code.is_empty() {
            return fail("blue_force.iff_code", "IFF code must not be empty".into());
        }
        if !(self.blue_force.radar.theta_jam > 0.0) {
            return fail("blue_force.radar.theta_jam", "threshold must be positive".into());
        }
        if self.blue_force.radar.escalate_after == 0 {
            return fail(
                "blue_force.radar.escalate_after",
                "escalation count must be at least 1".into(),
            );
        }
        if self.blue_force.weapons.is_empty() {
            return fail("blue_force.weapons", "at least one weapon type".into());
        }
        for (i, weapon) in self.blue_force.weapons.iter().enumerate() {
            let path = format!("blue_force.weapons[{i}]");
            for group in &self.red_force {
                if !weapon.salvo.contains_key(&group.platform) {
                    return fail(
                        &path,
                        format!("salvo table misses platform kind '{}'", group.platform),
                    );
                }
                if !weapon.kill_prob.contains_key(&group.platform) {
                    return fail(
                        &path,
                        format!("kill_prob table misses platform kind '{}'", group.platform),
                    );
                }
            }
            for (kind, &n) in &weapon.salvo {
                if n == 0 {
                    return fail(&path, format!("salvo for '{kind}' must be at least 1"));
                }
            }
            for (kind, &p) in &weapon.kill_prob {
                if !(0.0..=1.0).contains(&p) {
                    return fail(&path, format!("kill probability for '{kind}' is {p}"));
                }
            }
        }
        for (kind, spec) in &self.platforms {
            if !(spec.value.is_finite() && spec.value > 0.0) {
                return fail(
                    &format!("platforms.{kind}"),
                    "platform value must be positive".into(),
                );
            }
        }
        Ok(())
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, SimError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| SimError::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Track state of one red group during a run.
#[derive(Debug, Clone)]
pub struct GroupState {
    pub group: RedGroup,
    pub position_km: [f64; 2],
    pub lethality: Lethality,
    pub iff: IffStatus,
    pub intent_evidence: [f64; 10],
}

impl GroupState {
    pub fn range_km(&self, asset: [f64; 2]) -> f64 {
        let dx = self.position_km[0] - asset[0];
        let dy = self.position_km[1] - asset[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// One second of straight-line flight toward the asset.
    pub fn advance(&mut self, asset: [f64; 2]) {
        let dx = asset[0] - self.position_km[0];
        let dy = asset[1] - self.position_km[1];
        let dist = (dx * dx + dy * dy).sqrt();
        let step = self.group.speed_mach * MACH_KM_PER_S;
        if dist <= step || dist == 0.0 {
            self.position_km = asset;
        } else {
            self.position_km[0] += dx / dist * step;
            self.position_km[1] += dy / dist * step;
        }
    }

    pub fn to_track(&self, asset: [f64; 2]) -> TargetTrack {
        TargetTrack {
            id: self.group.id.clone(),
            range_km: self.range_km(asset),
            velocity_mach: self.group.speed_mach,
            altitude_km: self.group.altitude_km,
            aoa_deg: self.group.aoa_deg,
            lethality: self.lethality,
            intent_evidence: self.intent_evidence,
            iff: self.iff,
        }
    }
}

pub fn initial_groups(scenario: &Scenario) -> Result<Vec<GroupState>, SimError> {
    scenario
        .red_force
        .iter()
        .map(|group| {
            Ok(GroupState {
                position_km: group.start_km,
                lethality: scenario.group_lethality(group)?,
                iff: scenario.iff_status(group),
                intent_evidence: Scenario::intent_evidence(group),
                group: group.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tewa_core::threat::PlatformSpec;

    fn minimal_scenario() -> Scenario {
        let mut platforms = PlatformCatalogue::new();
        platforms.insert(
            "fighter".into(),
            PlatformSpec {
                lethality: Lethality::Lethal,
                value: 7.0,
                speed_mach: Some(2.0),
            },
        );
        let mut intent = BTreeMap::new();
        intent.insert("Strike".to_string(), 1.0);
        Scenario {
            name: "test".into(),
            arena_km: [200.0, 200.0],
            defended_asset_km: [100.0, 100.0],
            cl: 0.7,
            platforms,
            red_force: vec![RedGroup {
                id: "grp".into(),
                platform: "fighter".into(),
                count: 2,
                start_km: [0.0, 0.0],
                altitude_km: 5.0,
                speed_mach: 1.5,
                aoa_deg: 60.0,
                intent,
                iff_response: None,
            }],
            blue_force: BlueForce {
                iff_code: "k7".into(),
                radar: RadarConfig::default(),
                weapons: vec![WeaponEntry {
                    id: "sam".into(),
                    inventory: 6,
                    salvo: [("fighter".to_string(), 1)].into(),
                    kill_prob: [("fighter".to_string(), 0.8)].into(),
                }],
            },
        }
    }

    #[test]
    fn valid_scenario_passes() {
        assert!(minimal_scenario().validate().is_ok());
    }

    #[test]
    fn empty_red_force_fails() {
        let mut s = minimal_scenario();
        s.red_force.clear();
        let err = s.validate().unwrap_err();
        assert!(matches!(err, SimError::Validation { path, .. } if path == "red_force"));
    }

    #[test]
    fn unknown_platform_kind_is_named() {
        let mut s = minimal_scenario();
        s.red_force[0].platform = "zeppelin".into();
        let err = s.validate().unwrap_err();
        let text = err.to_string();
        assert!(text.contains("zeppelin"), "{text}");
    }

    #[test]
    fn intent_must_sum_to_one() {
        let mut s = minimal_scenario();
        s.red_force[0].intent.insert("Escort".into(), 0.5);
        assert!(s.validate().is_err());
    }

    #[test]
    fn weapon_tables_must_cover_red_kinds() {
        let mut s = minimal_scenario();
        s.blue_force.weapons[0].salvo.clear();
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("salvo table misses"), "{err}");
    }

    #[test]
    fn group_of_fighters_is_very_lethal_single_is_not() {
        let s = minimal_scenario();
        assert_eq!(s.group_lethality(&s.red_force[0]).unwrap(), Lethality::VeryLethal);
        let mut single = s.clone();
        single.red_force[0].count = 1;
        assert_eq!(
            single.group_lethality(&single.red_force[0]).unwrap(),
            Lethality::Lethal
        );
    }

    #[test]
    fn groups_fly_toward_the_asset_and_stop_there() {
        let s = minimal_scenario();
        let mut gs = initial_groups(&s).unwrap().remove(0);
        let r0 = gs.range_km(s.defended_asset_km);
        gs.advance(s.defended_asset_km);
        let r1 = gs.range_km(s.defended_asset_km);
        assert!(r1 < r0);
        for _ in 0..100_000 {
            gs.advance(s.defended_asset_km);
        }
        assert_eq!(gs.range_km(s.defended_asset_km), 0.0);
    }

    #[test]
    fn load_reports_parse_and_missing_files() {
        let err = load_scenario("/nonexistent/file.json").unwrap_err();
        assert!(matches!(err, SimError::Io { .. }));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = load_scenario(&path).unwrap_err();
        assert!(matches!(err, SimError::Parse { .. }));
    }
}
