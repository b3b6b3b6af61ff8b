#![allow(dead_code)]

use adawass::process::{random_tree, RandomTreeConfig};
use adawass::{TreeBuilder, TreeProcess};
use rand::Rng;

/// X_1 = 0, X_2 = +-1 w.p. 1/2; Y_1 = +-eps w.p. 1/2, Y_2 = sign(Y_1).
pub fn eps_pair(eps: f64) -> (TreeProcess, TreeProcess) {
    (eps_x(), eps_y(eps))
}

pub fn eps_x() -> TreeProcess {
    let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
    let n = b.add_child(0, vec![0.0], 1.0).unwrap();
    b.add_child(n, vec![-1.0], 0.5).unwrap();
    b.add_child(n, vec![1.0], 0.5).unwrap();
    b.build().unwrap()
}

pub fn eps_y(eps: f64) -> TreeProcess {
    let mut b = TreeBuilder::new(vec![1, 1]).unwrap();
    for s in [-1.0, 1.0] {
        let n = b.add_child(0, vec![s * eps], 0.5).unwrap();
        b.add_child(n, vec![s], 1.0).unwrap();
    }
    b.build().unwrap()
}

pub fn dirac(path: &[f64]) -> TreeProcess {
    TreeProcess::dirac(&path.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
}

/// Random shape: depth in 1..=max_depth, a common dimension in 1..=max_dim.
pub fn random_shape<R: Rng>(rng: &mut R, max_depth: usize, max_dim: usize) -> Vec<usize> {
    let depth = rng.gen_range(1..=max_depth);
    (0..depth).map(|_| rng.gen_range(1..=max_dim)).collect()
}

pub fn random_process<R: Rng>(rng: &mut R, dims: &[usize], max_branching: usize) -> TreeProcess {
    random_tree(
        rng,
        &RandomTreeConfig { value_dims: dims.to_vec(), max_branching, scale: 1.0 },
    )
}

/// Copies the subtree below the first level-1 node (with its value) as an
/// extra sibling and splits the original probability evenly between the two.
pub fn plant_duplicate(t: &TreeProcess) -> (TreeProcess, usize) {
    let dup_root = t.level(1)[0];
    let mut b = TreeBuilder::new(t.value_dims().to_vec()).unwrap();
    let mut map = vec![usize::MAX; t.len()];
    map[0] = b.root();
    let mut copied = 0;
    for i in 1..t.len() {
        let parent = map[t.node(i).parent.unwrap()];
        let prob = if i == dup_root { t.prob(i) / 2.0 } else { t.prob(i) };
        map[i] = b.add_child(parent, t.value(i).to_vec(), prob).unwrap();
    }
    // second copy of the subtree rooted at dup_root
    let mut stack = vec![(dup_root, b.root())];
    while let Some((src, parent)) = stack.pop() {
        let prob = if src == dup_root { t.prob(src) / 2.0 } else { t.prob(src) };
        let n = b.add_child(parent, t.value(src).to_vec(), prob).unwrap();
        copied += 1;
        for &c in t.children(src) {
            stack.push((c, n));
        }
    }
    (b.build().unwrap(), copied)
}

/// Random tree from a seed; all shapes drawn from the seed too.
pub fn seeded_tree(seed: u64, max_depth: usize, max_dim: usize, max_branching: usize) -> TreeProcess {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dims = random_shape(&mut rng, max_depth, max_dim);
    random_process(&mut rng, &dims, max_branching)
}

/// Two (or more) random trees sharing one shape.
pub fn seeded_family(seed: u64, n: usize, max_depth: usize, max_dim: usize, max_branching: usize) -> Vec<TreeProcess> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dims = random_shape(&mut rng, max_depth, max_dim);
    (0..n).map(|_| random_process(&mut rng, &dims, max_branching)).collect()
}
