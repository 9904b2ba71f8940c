#![allow(dead_code)]

use rccpabe_chain::ChainConfig;
use rccpabe_core::lsss::compile_policy;
use rccpabe_core::pairing::{init_group, rng_from_seed, SecurityLevel, SeededRng};
use rccpabe_core::scheme::*;

pub struct World {
    pub keys: SystemKeys,
    pub ta: TaRegistry,
    pub rng: SeededRng,
    pub config: ChainConfig,
}

pub struct User {
    pub cert: Certificate,
    pub sk: SecretKey,
    pub pk: PublicKeyShadow,
}

pub fn world(seed: &str) -> World {
    let group = init_group(SecurityLevel::Ss512, b"chain-tests").unwrap();
    let mut rng = rng_from_seed(seed.as_bytes());
    let keys = global_setup(&group, &mut rng);
    let ta = TaRegistry::new(&mut rng);
    World { keys, ta, rng, config: ChainConfig::default() }
}

impl World {
    pub fn user(&mut self, id: &str, attrs: &[&str]) -> User {
        let cert = self.ta.register(id.as_bytes(), b"sedan").unwrap();
        let a = normalize_attributes(attrs).unwrap();
        let (sk, pk) = keygen(&self.keys, &self.ta, &cert, &a, &mut self.rng).unwrap();
        User { cert, sk, pk }
    }

    pub fn ct(&mut self, policy: &str, kw: &str, event: &str, region: &str, data: &[u8]) -> CiphertextRecord {
        let p = compile_policy(policy).unwrap();
        let md = Metadata::new(event, region, 1_700_000_000);
        encrypt(&self.keys.pp, data, &p, kw.as_bytes(), true, &md, &mut self.rng).unwrap()
    }

    pub fn trapdoor(&mut self, u: &User, kw: &str) -> Trapdoor {
        trapdoor(&u.sk, kw.as_bytes(), &mut self.rng).unwrap()
    }
}

pub const POLICE: [&str; 2] = ["Role=TrafficPolice", "Region=R1"];
pub const STRICT: &str = "Role=TrafficPolice AND Region=R1";
