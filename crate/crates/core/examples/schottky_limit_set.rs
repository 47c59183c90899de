//! Words, ping-pong domains and sampled limit points of the shipped groups.

use horolab::group::{FuchsianGroup, WordSpec};

fn main() -> horolab::Result<()> {
    for g in [FuchsianGroup::default_schottky(), FuchsianGroup::default_cusped()] {
        println!("{} ({}), {} words up to length 6", g.name(), g.kind().name(), g.word_count(6));
        for l in g.letters() {
            let d = g.domain(l);
            println!("  {}: domain [{}, {}]", g.letter_name(l), d.lo, d.hi);
        }
        let w = g.word(&g.parse_word("abAB")?)?;
        println!("  commutator displacement {:.4}", w.matrix.displacement());
        for seed in 0..4 {
            let x = g.sample_limit_point(&WordSpec::Random { seed, depth: 40 })?;
            let domain = g.domain_of(x.point).map(|l| g.letter_name(l));
            println!("  seed {seed}: {} ({}), domain {domain:?}", x.point, x.class.name());
        }
        let p = g.sample_limit_point(&WordSpec::Periodic { prefix: g.parse_word("a")?, period: g.parse_word("b")? })?;
        println!("  a b b b ... -> {} ({})", p.point, p.class.name());
    }
    Ok(())
}
