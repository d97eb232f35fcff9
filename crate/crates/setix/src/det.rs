//! Hash containers with a fixed hasher seed.
//!
//! Structure behavior (scan order, witness choice, probe counts) must be a
//! pure function of the operation history and the configured seed, so the
//! randomly keyed std hasher cannot be used anywhere iteration order or
//! short-circuiting is observable.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::BuildHasherDefault;

pub type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
pub type DetSet<K> = HashSet<K, BuildHasherDefault<DefaultHasher>>;
