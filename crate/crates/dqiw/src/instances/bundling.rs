//! Automotive option-bundling model and its 0–1 ILP.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::Ilp01;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub name: String,
    pub price: f64,
    pub unit_cost: f64,
    /// Fraction of vehicles sold with exactly this option among all tracked ones.
    pub take_rate_only: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetRate {
    pub options: Vec<usize>,
    pub take_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundlingModel {
    pub options: Vec<OptionSpec>,
    /// Exact take rates of option sets with two or more members.
    #[serde(default)]
    pub subset_take_rates: Vec<SubsetRate>,
    pub packages: usize,
    pub discount: f64,
    pub elasticity: f64,
    pub reference_price: f64,
    pub max_package_size: usize,
    #[serde(default)]
    pub mandatory_families: Vec<Vec<usize>>,
    #[serde(default)]
    pub optional_families: Vec<Vec<usize>>,
    /// Pairs that may not share a package.
    #[serde(default)]
    pub incompatible: Vec<(usize, usize)>,
    /// `(i, j)`: option `j` in a package requires option `i` in it.
    #[serde(default)]
    pub dependencies: Vec<(usize, usize)>,
    #[serde(default)]
    pub existing_packages: Vec<Vec<usize>>,
    pub currency_quantum: f64,
}

/// `T · min(1, (P_new/P_old)^ε)`.
pub fn take_rate_migration(t: f64, p_old: f64, p_new: f64, elasticity: f64) -> Result<f64> {
    if !(p_old > 0.0 && p_new > 0.0) {
        return Err(Error::InvalidInput(format!(
            "prices must be positive, got {p_old} and {p_new}"
        )));
    }
    Ok(t * (p_new / p_old).powf(elasticity).min(1.0))
}

fn key(set: &[usize]) -> Vec<usize> {
    let mut k = set.to_vec();
    k.sort_unstable();
    k
}

impl BundlingModel {
    pub fn n_options(&self) -> usize {
        self.options.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn exact_rates(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut rates: BTreeMap<Vec<usize>, f64> = self
            .options
            .iter()
            .enumerate()
            .map(|(i, o)| (vec![i], o.take_rate_only))
            .collect();
        for s in &self.subset_take_rates {
            rates.insert(key(&s.options), s.take_rate);
        }
        rates
    }

    /// Fraction of vehicles with none of the tracked options.
    pub fn take_rate_none(&self) -> f64 {
        1.0 - self.exact_rates().values().sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_options();
        let bad =
            |field: &str, why: String| Err(Error::InvalidInput(format!("field {field}: {why}")));
        if n == 0 {
            return bad("options", "at least one option is required".into());
        }
        for (i, o) in self.options.iter().enumerate() {
            if !(o.price > 0.0) || !(o.unit_cost >= 0.0) {
                return bad(
                    &format!("options[{i}]"),
                    "price must be positive and unit_cost nonnegative".into(),
                );
            }
            if !(0.0..=1.0).contains(&o.take_rate_only) {
                return bad(
                    &format!("options[{i}].take_rate_only"),
                    format!("{} is not in [0, 1]", o.take_rate_only),
                );
            }
        }
        for (k, s) in self.subset_take_rates.iter().enumerate() {
            if s.options.len() < 2
                || s.options.iter().any(|&i| i >= n)
                || key(&s.options).windows(2).any(|w| w[0] == w[1])
            {
                return bad(
                    &format!("subset_take_rates[{k}].options"),
                    "needs two or more distinct valid options".into(),
                );
            }
            if !(0.0..=1.0).contains(&s.take_rate) {
                return bad(
                    &format!("subset_take_rates[{k}].take_rate"),
                    format!("{} is not in [0, 1]", s.take_rate),
                );
            }
        }
        let none = self.take_rate_none();
        if !(-1e-12..=1.0).contains(&none) {
            return bad(
                "subset_take_rates",
                format!("take rates sum to {}, more than 1", 1.0 - none),
            );
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount", format!("{} is not in [0, 1)", self.discount));
        }
        if !(self.elasticity < 0.0) {
            return bad("elasticity", "must be negative".into());
        }
        let max_price = self.options.iter().map(|o| o.price).fold(0.0, f64::max);
        if !(self.reference_price > max_price) {
            return bad(
                "reference_price",
                format!("must exceed the largest option price {max_price}"),
            );
        }
        if self.packages == 0 || self.max_package_size == 0 {
            return bad(
                "packages",
                "packages and max_package_size must be positive".into(),
            );
        }
        if !(self.currency_quantum > 0.0) {
            return bad("currency_quantum", "must be positive".into());
        }
        let sets = [
            ("mandatory_families", &self.mandatory_families),
            ("optional_families", &self.optional_families),
            ("existing_packages", &self.existing_packages),
        ];
        for (field, list) in sets {
            for (k, s) in list.iter().enumerate() {
                if s.is_empty() || s.iter().any(|&i| i >= n) {
                    return bad(
                        &format!("{field}[{k}]"),
                        "must be a nonempty list of valid options".into(),
                    );
                }
            }
        }
        for (field, pairs) in [
            ("incompatible", &self.incompatible),
            ("dependencies", &self.dependencies),
        ] {
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if i >= n || j >= n || i == j {
                    return bad(
                        &format!("{field}[{k}]"),
                        format!("({i}, {j}) is not a pair of distinct options"),
                    );
                }
            }
        }
        Ok(())
    }

    fn compatible(&self, i: usize, j: usize) -> bool {
        !self
            .incompatible
            .iter()
            .any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i))
    }

    /// Take rate of a package after migration from every proper nonempty
    /// subset and from vehicles with none of the options.
    pub fn package_take_rate(&self, set: &[usize]) -> Result<f64> {
        let set = key(set);
        if set.is_empty()
            || set.len() > self.max_package_size
            || set.iter().any(|&i| i >= self.n_options())
        {
            return Err(Error::InvalidInput(format!(
                "package {set:?} is empty, too large or names unknown options"
            )));
        }
        let rates = self.exact_rates();
        let rate_of = |s: &[usize]| -> Result<f64> {
            if s.len() == 1 {
                return Ok(rates[s]);
            }
            rates
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("missing take rate for subset {s:?}")))
        };
        let price = |s: &[usize]| s.iter().map(|&i| self.options[i].price).sum::<f64>();
        let p_new = (1.0 - self.discount) * price(&set);
        let mut total = if set.len() == 1 { 0.0 } else { rate_of(&set)? };
        let k = set.len();
        for mask in 1..(1u32 << k) - 1 {
            let sub: Vec<usize> = (0..k)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| set[b])
                .collect();
            total += take_rate_migration(rate_of(&sub)?, price(&sub), p_new, self.elasticity)?;
        }
        total += take_rate_migration(
            self.take_rate_none().max(0.0),
            self.reference_price,
            p_new,
            self.elasticity,
        )?;
        Ok(total)
    }

    /// The `O` highest-take-rate options that are pairwise compatible.
    pub fn nominal_package(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_options()).collect();
        order.sort_by(|&a, &b| {
            self.options[b]
                .take_rate_only
                .total_cmp(&self.options[a].take_rate_only)
                .then(a.cmp(&b))
        });
        let mut chosen: Vec<usize> = Vec::new();
        for i in order {
            if chosen.len() == self.max_package_size {
                break;
            }
            if chosen.iter().all(|&j| self.compatible(i, j)) {
                chosen.push(i);
            }
        }
        chosen.sort_unstable();
        chosen
    }

    pub fn var_index(&self, option: usize, package: usize) -> usize {
        package * self.n_options() + option
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundlingIlp {
    pub ilp: Ilp01,
    pub nominal_package: Vec<usize>,
    pub nominal_take_rate: f64,
    pub note: String,
}

/// Binary program over `x_im`, variable `m·N + i`.
pub fn bundling_to_ilp(model: &BundlingModel) -> Result<BundlingIlp> {
    model.validate()?;
    let n_opt = model.n_options();
    let nvars = n_opt * model.packages;
    let nominal = model.nominal_package();
    let t_nom = model.package_take_rate(&nominal)?;
    let mut c = vec![0i64; nvars];
    for m in 0..model.packages {
        for (i, o) in model.options.iter().enumerate() {
            let margin = (1.0 - model.discount) * o.price - o.unit_cost;
            let scaled = (t_nom * margin / model.currency_quantum).round();
            if scaled.abs() >= (1u64 << 40) as f64 {
                return Err(Error::InvalidInput(format!(
                    "field currency_quantum: coefficient {scaled} too large"
                )));
            }
            c[model.var_index(i, m)] = scaled as i64;
        }
    }
    let mut a: Vec<Vec<i64>> = Vec::new();
    let mut b = Vec::new();
    let mut a_eq: Vec<Vec<i64>> = Vec::new();
    let mut b_eq = Vec::new();
    let row = |terms: &[(usize, i64)]| {
        let mut r = vec![0i64; nvars];
        for &(v, coef) in terms {
            r[v] += coef;
        }
        r
    };
    for m in 0..model.packages {
        let x = |i: usize| model.var_index(i, m);
        for fam in &model.mandatory_families {
            a_eq.push(row(&fam.iter().map(|&i| (x(i), 1)).collect::<Vec<_>>()));
            b_eq.push(1);
        }
        for fam in &model.optional_families {
            a.push(row(&fam.iter().map(|&i| (x(i), 1)).collect::<Vec<_>>()));
            b.push(1);
        }
        if model.max_package_size < n_opt {
            a.push(row(&(0..n_opt).map(|i| (x(i), 1)).collect::<Vec<_>>()));
            b.push(model.max_package_size as i64);
        }
        for &(i, j) in &model.incompatible {
            a.push(row(&[(x(i), 1), (x(j), 1)]));
            b.push(1);
        }
        for &(i, j) in &model.dependencies {
            a.push(row(&[(x(j), 1), (x(i), -1)]));
            b.push(0);
        }
        for e in &model.existing_packages {
            a.push(row(&e.iter().map(|&i| (x(i), 1)).collect::<Vec<_>>()));
            b.push(e.len() as i64 - 1);
        }
    }
    let ilp = Ilp01::new(c, a, b, a_eq, b_eq)?;
    Ok(BundlingIlp {
        ilp,
        nominal_package: nominal,
        nominal_take_rate: t_nom,
        note: "package take rate evaluated once at the nominal package; objective linearized"
            .into(),
    })
}

/// Parameters of [`generate_bundling_model`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundlingParams {
    pub options: usize,
    pub packages: usize,
    pub max_package_size: usize,
    pub mandatory_families: usize,
    pub optional_families: usize,
    pub incompatible_pairs: usize,
    pub dependencies: usize,
    pub existing_packages: usize,
}

impl Default for BundlingParams {
    fn default() -> Self {
        BundlingParams {
            options: 8,
            packages: 2,
            max_package_size: 3,
            mandatory_families: 1,
            optional_families: 1,
            incompatible_pairs: 2,
            dependencies: 1,
            existing_packages: 1,
        }
    }
}

/// Random model with prices in 200..2000, margins 30–60 %, and exact take
/// rates for every subset up to the package size.
pub fn generate_bundling_model(params: &BundlingParams, seed: u64) -> Result<BundlingModel> {
    let n = params.options;
    let fam_size = 2;
    if n < 2 || (params.mandatory_families + params.optional_families) * fam_size > n {
        return Err(Error::InvalidInput(
            "not enough options for the requested families".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let options: Vec<OptionSpec> = (0..n)
        .map(|i| {
            let price = (rng.random_range(200.0..2000.0_f64) / 10.0).round() * 10.0;
            OptionSpec {
                name: format!("option{i}"),
                price,
                unit_cost: (price * rng.random_range(0.4..0.7) / 10.0).round() * 10.0,
                take_rate_only: rng.random_range(0.02..0.08),
            }
        })
        .collect();
    let mut subset_take_rates = Vec::new();
    for size in 2..=params.max_package_size.min(n) {
        for set in itertools::Itertools::combinations(0..n, size) {
            subset_take_rates.push(SubsetRate {
                options: set,
                take_rate: rng.random_range(0.0..0.01) / size as f64,
            });
        }
    }
    let perm = sample(&mut rng, n, n).into_vec();
    let mut next = 0;
    let mut family = || {
        let f: Vec<usize> = perm[next..next + fam_size].to_vec();
        next += fam_size;
        f
    };
    let mandatory_families: Vec<Vec<usize>> =
        (0..params.mandatory_families).map(|_| family()).collect();
    let optional_families: Vec<Vec<usize>> =
        (0..params.optional_families).map(|_| family()).collect();
    let pair = |rng: &mut ChaCha8Rng| {
        let p = sample(rng, n, 2).into_vec();
        (p[0], p[1])
    };
    let incompatible = (0..params.incompatible_pairs)
        .map(|_| pair(&mut rng))
        .collect();
    let dependencies = (0..params.dependencies).map(|_| pair(&mut rng)).collect();
    let existing_packages = (0..params.existing_packages)
        .map(|_| {
            let mut e = sample(&mut rng, n, params.max_package_size.min(n)).into_vec();
            e.sort_unstable();
            e
        })
        .collect();
    let max_price = options.iter().map(|o| o.price).fold(0.0, f64::max);
    let model = BundlingModel {
        options,
        subset_take_rates,
        packages: params.packages,
        discount: 0.1,
        elasticity: -1.5,
        reference_price: 2.0 * max_price,
        max_package_size: params.max_package_size,
        mandatory_families,
        optional_families,
        incompatible,
        dependencies,
        existing_packages,
        currency_quantum: 10.0,
    };
    model.validate()?;
    Ok(model)
}
