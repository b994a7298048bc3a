//! Minimax Dijkstra against exhaustive path enumeration on random grids,
//! and a 2D Agmon field from the same machinery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reslab::wells::{agmon_field_2d, barrier_cost_bruteforce, barrier_cost_grid, Grid2D};

fn main() -> reslab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = Grid2D { nx: 5, ny: 5, x0: 0.0, y0: 0.0, hx: 1.0, hy: 1.0 };
    let mut agree = 0;
    for _ in 0..100 {
        let v: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x = (0, 0);
        let t = [(rng.gen_range(1..5), rng.gen_range(1..5))];
        let fast = barrier_cost_grid(&grid, &v, x, &t)?;
        let slow = barrier_cost_bruteforce(&grid, &v, x, &t)?;
        agree += usize::from(fast == slow);
    }
    println!("Dijkstra equals enumeration on {agree}/100 grids");

    // V = x^2 + y^2 on [-1, 1]^2: the distance from the origin is r^2 / 2
    let g = Grid2D { nx: 81, ny: 81, x0: -1.0, y0: -1.0, hx: 0.025, hy: 0.025 };
    let v = g.sample(|x, y| x * x + y * y);
    let field = agmon_field_2d(&g, &v, &[(40, 40)])?;
    for ix in [50, 60, 70, 80] {
        let (x, _) = g.point(ix, 40);
        println!("  d(0, ({x:.2}, 0)) = {:.5}  exact {:.5}", field.dist[g.index(ix, 40)], x * x / 2.0);
    }
    Ok(())
}
