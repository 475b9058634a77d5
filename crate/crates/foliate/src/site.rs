//! Finite sites: a finite category with a composition table, sieves, and an
//! exhaustive checker for the three Grothendieck topology axioms.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::SiteError;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Clone, Debug)]
pub struct SiteMorphism {
    pub name: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

pub type Sieve = BTreeSet<MorId>;

#[derive(Clone, Debug)]
pub struct FiniteSite {
    pub objects: Vec<String>,
    pub morphisms: Vec<SiteMorphism>,
    pub identities: Vec<MorId>,
    /// composition[(g, f)] = g . f whenever tgt(f) = src(g)
    pub composition: BTreeMap<(MorId, MorId), MorId>,
    /// declared covers per object
    pub covers: Vec<Vec<Sieve>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomVerdict {
    pub axiom: u8,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SiteReport {
    pub object_count: usize,
    pub morphism_count: usize,
    pub verdicts: Vec<AxiomVerdict>,
    pub all_pass: bool,
}

impl FiniteSite {
    fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.composition.get(&(g, f)).copied()
    }

    fn morphisms_into(&self, a: ObjId) -> Vec<MorId> {
        (0..self.morphisms.len())
            .filter(|&m| self.morphisms[m].tgt == a)
            .collect()
    }

    /// Restriction f*S = { g : c -> b | f.g in S } for f: b -> a.
    fn restrict(&self, f: MorId, s: &Sieve) -> Sieve {
        let b = self.morphisms[f].src;
        self.morphisms_into(b)
            .into_iter()
            .filter(|&g| self.compose(f, g).map(|fg| s.contains(&fg)).unwrap_or(false))
            .collect()
    }

    fn maximal_sieve(&self, a: ObjId) -> Sieve {
        self.morphisms_into(a).into_iter().collect()
    }

    fn is_cover(&self, a: ObjId, s: &Sieve) -> bool {
        self.covers[a].iter().any(|c| c == s)
    }

    fn is_sieve(&self, a: ObjId, s: &Sieve) -> bool {
        for &f in s {
            if self.morphisms[f].tgt != a {
                return false;
            }
            let b = self.morphisms[f].src;
            for g in self.morphisms_into(b) {
                match self.compose(f, g) {
                    Some(fg) => {
                        if !s.contains(&fg) {
                            return false;
                        }
                    }
                    None => return false,
                }
            }
        }
        true
    }

    /// All sieves on `a` (exhaustive; the morphism fan-in must stay small).
    fn all_sieves(&self, a: ObjId) -> Vec<Sieve> {
        let ms = self.morphisms_into(a);
        assert!(ms.len() <= 20, "sieve enumeration over more than 2^20 subsets");
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << ms.len()) {
            let s: Sieve = ms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &m)| m)
                .collect();
            if self.is_sieve(a, &s) {
                out.push(s);
            }
        }
        out
    }

    fn sieve_display(&self, s: &Sieve) -> String {
        let names: Vec<&str> = s.iter().map(|&m| self.morphisms[m].name.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }

    /// Category sanity: identities behave, composition closed and
    /// associative, declared covers are genuine sieves.
    pub fn validate(&self) -> Result<(), SiteError> {
        let bad = |reason: String| Err(SiteError::MalformedSite { reason });
        if self.identities.len() != self.objects.len() {
            return bad("one identity per object required".into());
        }
        for (a, &i) in self.identities.iter().enumerate() {
            if self.morphisms[i].src != a || self.morphisms[i].tgt != a {
                return bad(format!("identity of {} has wrong endpoints", self.objects[a]));
            }
        }
        for f in 0..self.morphisms.len() {
            for g in 0..self.morphisms.len() {
                let composable = self.morphisms[f].tgt == self.morphisms[g].src;
                match (composable, self.compose(g, f)) {
                    (true, None) => {
                        return bad(format!(
                            "missing composite {} . {}",
                            self.morphisms[g].name, self.morphisms[f].name
                        ))
                    }
                    (false, Some(_)) => {
                        return bad(format!(
                            "composite declared for non-composable pair {} . {}",
                            self.morphisms[g].name, self.morphisms[f].name
                        ))
                    }
                    (true, Some(gf)) => {
                        if self.morphisms[gf].src != self.morphisms[f].src
                            || self.morphisms[gf].tgt != self.morphisms[g].tgt
                        {
                            return bad("composite has wrong endpoints".into());
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        // unit laws and associativity
        for f in 0..self.morphisms.len() {
            let src_id = self.identities[self.morphisms[f].src];
            let tgt_id = self.identities[self.morphisms[f].tgt];
            if self.compose(f, src_id) != Some(f) || self.compose(tgt_id, f) != Some(f) {
                return bad(format!("unit law fails at {}", self.morphisms[f].name));
            }
        }
        for f in 0..self.morphisms.len() {
            for g in 0..self.morphisms.len() {
                if self.morphisms[f].tgt != self.morphisms[g].src {
                    continue;
                }
                for h in 0..self.morphisms.len() {
                    if self.morphisms[g].tgt != self.morphisms[h].src {
                        continue;
                    }
                    let left = self.compose(h, self.compose(g, f).unwrap());
                    let right = self.compose(self.compose(h, g).unwrap(), f);
                    if left != right || left.is_none() {
                        return bad("associativity fails".into());
                    }
                }
            }
        }
        for (a, sieves) in self.covers.iter().enumerate() {
            for s in sieves {
                if !self.is_sieve(a, s) {
                    return bad(format!(
                        "declared cover {} on {} is not precomposition-closed",
                        self.sieve_display(s),
                        self.objects[a]
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Checks the three topology axioms, producing a witness on each failure:
/// 1. the sieve generated by the identity (the maximal sieve) is a cover;
/// 2. covers restrict to covers along every morphism;
/// 3. a sieve whose restriction along every member of some cover is a cover
///    must itself be a cover.
pub fn verify_site_axioms(site: &FiniteSite) -> Result<SiteReport, SiteError> {
    site.validate()?;
    let mut verdicts = Vec::new();

    // axiom 1
    let mut a1 = AxiomVerdict { axiom: 1, pass: true, witness: None };
    for a in 0..site.objects.len() {
        let max = site.maximal_sieve(a);
        if !site.is_cover(a, &max) {
            a1.pass = false;
            a1.witness = Some(format!(
                "sieve generated by id_{} is not a cover",
                site.objects[a]
            ));
            break;
        }
    }
    verdicts.push(a1);

    // axiom 2
    let mut a2 = AxiomVerdict { axiom: 2, pass: true, witness: None };
    'outer2: for a in 0..site.objects.len() {
        for s in &site.covers[a] {
            for f in site.morphisms_into(a) {
                let restricted = site.restrict(f, s);
                let b = site.morphisms[f].src;
                if !site.is_cover(b, &restricted) {
                    a2.pass = false;
                    a2.witness = Some(format!(
                        "restriction of {} along {} is {} which is not a cover of {}",
                        site.sieve_display(s),
                        site.morphisms[f].name,
                        site.sieve_display(&restricted),
                        site.objects[b]
                    ));
                    break 'outer2;
                }
            }
        }
    }
    verdicts.push(a2);

    // axiom 3
    let mut a3 = AxiomVerdict { axiom: 3, pass: true, witness: None };
    'outer3: for a in 0..site.objects.len() {
        let sieves = site.all_sieves(a);
        for s in &site.covers[a] {
            for r in &sieves {
                if site.is_cover(a, r) {
                    continue;
                }
                let all_restrict = s.iter().all(|&f| {
                    let b = site.morphisms[f].src;
                    site.is_cover(b, &site.restrict(f, r))
                });
                if all_restrict {
                    a3.pass = false;
                    a3.witness = Some(format!(
                        "sieve {} restricts to covers along every member of cover {} but is not a cover of {}",
                        site.sieve_display(r),
                        site.sieve_display(s),
                        site.objects[a]
                    ));
                    break 'outer3;
                }
            }
        }
    }
    verdicts.push(a3);

    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(SiteReport {
        object_count: site.objects.len(),
        morphism_count: site.morphisms.len(),
        verdicts,
        all_pass,
    })
}

/// The one-object, identity-only site with its maximal sieve as the cover.
pub fn trivial_site() -> FiniteSite {
    let mut composition = BTreeMap::new();
    composition.insert((0, 0), 0);
    FiniteSite {
        objects: vec!["pt".into()],
        morphisms: vec![SiteMorphism { name: "id_pt".into(), src: 0, tgt: 0 }],
        identities: vec![0],
        composition,
        covers: vec![vec![[0].into_iter().collect()]],
    }
}

/// Finite surrogate of the site induced by the Reeb presentation's chart
/// category. The shift generates an infinite cyclic group, so the finite
/// site quotients it to order `m`: objects Ca, Ct; morphisms T^j, T^j.phi
/// (j mod m) and id_Ct. Covers: the maximal sieves plus the sieve generated
/// by the translates of phi.
pub fn reeb_finite_site(m: usize) -> FiniteSite {
    assert!(m >= 2);
    // morphism ids: 0..m are T^j (T^0 = id_Ca), m is id_Ct, m+1..=2m are T^j.phi
    let mut morphisms = Vec::new();
    for j in 0..m {
        let name = if j == 0 { "id_Ca".to_string() } else { format!("T^{j}") };
        morphisms.push(SiteMorphism { name, src: 0, tgt: 0 });
    }
    morphisms.push(SiteMorphism { name: "id_Ct".into(), src: 1, tgt: 1 });
    for j in 0..m {
        let name = if j == 0 { "phi".to_string() } else { format!("T^{j}.phi") };
        morphisms.push(SiteMorphism { name, src: 1, tgt: 0 });
    }
    let id_ct = m;
    let phi = |j: usize| m + 1 + j;
    let mut composition = BTreeMap::new();
    for j in 0..m {
        for k in 0..m {
            composition.insert((j, k), (j + k) % m);
            composition.insert((j, phi(k)), phi((j + k) % m));
        }
        composition.insert((phi(j), id_ct), phi(j));
    }
    composition.insert((id_ct, id_ct), id_ct);
    let max_ca: Sieve = (0..m).chain((0..m).map(phi)).collect();
    let max_ct: Sieve = [id_ct].into_iter().collect();
    let s_phi: Sieve = (0..m).map(phi).collect();
    FiniteSite {
        objects: vec!["Ca".into(), "Ct".into()],
        morphisms,
        identities: vec![0, id_ct],
        composition,
        covers: vec![vec![max_ca, s_phi], vec![max_ct]],
    }
}

/// Targeted breakages of the Reeb site, one per axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteMutation {
    /// removes the maximal sieve of Ca from the covers (axiom 1 fails)
    DropIdentityCover,
    /// adds the singleton sieve {phi}, not stable under the shift
    /// restriction (axiom 2 fails)
    AddUnsaturatedCover,
    /// adds the empty sieve as a cover of both objects; restriction stays
    /// a cover everywhere but the vacuous hypothesis of axiom 3 then forces
    /// every sieve to be a cover (axiom 3 fails)
    AddEmptyCover,
}

pub fn mutated_reeb_site(m: usize, mutation: SiteMutation) -> FiniteSite {
    let mut site = reeb_finite_site(m);
    match mutation {
        SiteMutation::DropIdentityCover => {
            let max = site.maximal_sieve(0);
            site.covers[0].retain(|s| s != &max);
        }
        SiteMutation::AddUnsaturatedCover => {
            let phi0 = m + 1;
            site.covers[0].push([phi0].into_iter().collect());
        }
        SiteMutation::AddEmptyCover => {
            site.covers[0].push(Sieve::new());
            site.covers[1].push(Sieve::new());
        }
    }
    site
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_site_passes() {
        let report = verify_site_axioms(&trivial_site()).unwrap();
        assert!(report.all_pass);
    }

    #[test]
    fn reeb_site_passes_exhaustively() {
        for m in [2usize, 3] {
            let report = verify_site_axioms(&reeb_finite_site(m)).unwrap();
            assert!(report.all_pass, "m={m}: {:?}", report.verdicts);
        }
    }

    #[test]
    fn mutations_fail_their_target_axiom_with_witness() {
        let r1 = verify_site_axioms(&mutated_reeb_site(3, SiteMutation::DropIdentityCover)).unwrap();
        assert!(!r1.verdicts[0].pass && r1.verdicts[0].witness.is_some());

        let r2 = verify_site_axioms(&mutated_reeb_site(3, SiteMutation::AddUnsaturatedCover)).unwrap();
        assert!(r2.verdicts[0].pass, "axiom 1 untouched");
        assert!(!r2.verdicts[1].pass && r2.verdicts[1].witness.is_some());

        let r3 = verify_site_axioms(&mutated_reeb_site(3, SiteMutation::AddEmptyCover)).unwrap();
        assert!(r3.verdicts[0].pass, "axiom 1 untouched");
        assert!(r3.verdicts[1].pass, "axiom 2 untouched: the empty sieve restricts to the empty sieve");
        assert!(!r3.verdicts[2].pass && r3.verdicts[2].witness.is_some());
    }

    #[test]
    fn malformed_sites_are_rejected() {
        let mut site = trivial_site();
        site.composition.clear();
        assert!(matches!(site.validate(), Err(SiteError::MalformedSite { .. })));
        let mut site2 = reeb_finite_site(2);
        // corrupt a cover so it is no longer precomposition-closed:
        // {T} alone is not a sieve since T.T = id is missing
        site2.covers[0].push([1usize].into_iter().collect());
        assert!(matches!(site2.validate(), Err(SiteError::MalformedSite { .. })));
    }
}
