use rustc_hash::FxHashMap as HashMap;

use rand::{Rng, RngExt};

use crate::store::{ContactObservation, DeviceRecord, DeviceStore};
use crate::token::{Pseudonym, TokenId};

/// Opaque reference to a registered device.
///
/// Handles are issued in registration order; the simulator registers
/// devices in a shuffled order so a handle says nothing about its carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeviceHandle(u32);

impl DeviceHandle {
    /// Dense slot index, `0..DeviceNetwork::len()`.
    pub fn slot(self) -> usize {
        self.0 as usize
    }
}

/// Stand-in for the broadcast medium: a token reaches the device that
/// generated it, and an unknown token reaches nobody.
#[derive(Debug, Clone, Default)]
pub struct TokenRouter {
    routes: HashMap<TokenId, DeviceHandle>,
}

impl TokenRouter {
    pub fn lookup(&self, token: TokenId) -> Option<DeviceHandle> {
        self.routes.get(&token).copied()
    }

    pub fn contains(&self, token: TokenId) -> bool {
        self.routes.contains_key(&token)
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    fn fresh_token<R: Rng + ?Sized>(&self, avoid: Option<TokenId>, rng: &mut R) -> TokenId {
        loop {
            let t = TokenId::random(rng);
            if !self.contains(t) && Some(t) != avoid {
                return t;
            }
        }
    }

    fn forget(&mut self, tokens: &[TokenId]) {
        for t in tokens {
            self.routes.remove(t);
        }
    }
}

/// Whether both phones were active for a contact. Each side records
/// independently with its own probability; both draws are always taken.
pub fn apply_app_usage<R: Rng + ?Sized>(rho_u: f64, rho_v: f64, rng: &mut R) -> bool {
    let u = rng.random_bool(rho_u);
    let v = rng.random_bool(rho_v);
    u && v
}

/// Logs one contact on both devices with two fresh tokens and teaches the
/// router where each token lives. Returns `(token of u, token of v)`.
pub fn update_dev_data<R: Rng + ?Sized>(
    store_u: &mut DeviceStore,
    handle_u: DeviceHandle,
    store_v: &mut DeviceStore,
    handle_v: DeviceHandle,
    contact: ContactObservation,
    router: &mut TokenRouter,
    rng: &mut R,
) -> (TokenId, TokenId) {
    let h_u = router.fresh_token(None, rng);
    let h_v = router.fresh_token(Some(h_u), rng);
    store_u.append(DeviceRecord {
        day: contact.day,
        own_token: h_u,
        peer_token: h_v,
        distance: contact.distance,
        duration: contact.duration,
    });
    store_v.append(DeviceRecord {
        day: contact.day,
        own_token: h_v,
        peer_token: h_u,
        distance: contact.distance,
        duration: contact.duration,
    });
    router.routes.insert(h_u, handle_u);
    router.routes.insert(h_v, handle_v);
    (h_u, h_v)
}

/// All devices of a run together with the router.
#[derive(Debug, Clone, Default)]
pub struct DeviceNetwork {
    stores: Vec<DeviceStore>,
    router: TokenRouter,
    pseudonyms: HashMap<Pseudonym, DeviceHandle>,
}

impl DeviceNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self) -> DeviceHandle {
        let h = DeviceHandle(self.stores.len() as u32);
        self.stores.push(DeviceStore::new());
        h
    }

    pub fn len(&self) -> usize {
        self.stores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stores.is_empty()
    }

    pub fn handles(&self) -> impl Iterator<Item = DeviceHandle> + '_ {
        (0..self.stores.len() as u32).map(DeviceHandle)
    }

    pub fn store(&self, h: DeviceHandle) -> &DeviceStore {
        &self.stores[h.slot()]
    }

    pub fn store_mut(&mut self, h: DeviceHandle) -> &mut DeviceStore {
        &mut self.stores[h.slot()]
    }

    pub fn router(&self) -> &TokenRouter {
        &self.router
    }

    pub fn route(&self, token: TokenId) -> Option<DeviceHandle> {
        self.router.lookup(token)
    }

    /// [`update_dev_data`] on two registered devices.
    pub fn record_contact<R: Rng + ?Sized>(
        &mut self,
        a: DeviceHandle,
        b: DeviceHandle,
        contact: ContactObservation,
        rng: &mut R,
    ) -> (TokenId, TokenId) {
        assert_ne!(a, b, "a device cannot meet itself");
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (left, right) = self.stores.split_at_mut(hi.slot());
        let (store_lo, store_hi) = (&mut left[lo.slot()], &mut right[0]);
        let (store_a, store_b) = if a < b {
            (store_lo, store_hi)
        } else {
            (store_hi, store_lo)
        };
        update_dev_data(store_a, a, store_b, b, contact, &mut self.router, rng)
    }

    /// Prunes every store to the window ending at `current_day` and drops
    /// the forgotten tokens from the router.
    pub fn prune_window(&mut self, current_day: u32, t_w: u32) -> usize {
        let mut dropped = 0;
        for store in &mut self.stores {
            let gone = store.prune_window(current_day, t_w);
            dropped += gone.len();
            self.router.forget(&gone);
        }
        dropped
    }

    pub fn reset_scores(&mut self) {
        for s in &mut self.stores {
            s.reset_scores();
        }
    }

    /// Hands every device a fresh random pseudonym for today's reports.
    pub fn rotate_pseudonyms<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.pseudonyms.clear();
        for (i, store) in self.stores.iter_mut().enumerate() {
            let p = loop {
                let p = Pseudonym::random(rng);
                if !self.pseudonyms.contains_key(&p) {
                    break p;
                }
            };
            self.pseudonyms.insert(p, DeviceHandle(i as u32));
            store.set_pseudonym(p);
        }
    }

    /// Today's pseudonym to device lookup, used by the party that acts on
    /// the selection.
    pub fn resolve(&self, p: Pseudonym) -> Option<DeviceHandle> {
        self.pseudonyms.get(&p).copied()
    }

    /// Every device with a positive score, as `(pseudonym, score)` in slot order.
    pub fn score_reports(&self) -> Vec<(Pseudonym, u32)> {
        self.stores
            .iter()
            .filter(|s| s.score() > 0)
            .map(|s| {
                let p = s
                    .pseudonym()
                    .expect("pseudonyms must be rotated before reporting");
                (p, s.score())
            })
            .collect()
    }
}
