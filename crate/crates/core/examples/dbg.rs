use schurc::ximat::{CsMatrix, m_of_tridiag, t_ba};
use schurc::schur::{mult_tridiag};
fn main() {
    let b = CsMatrix::new(1, vec![(0,0,1),(1,2,1),(2,1,1),(2,2,3)]).unwrap();
    let a = CsMatrix::new(1, vec![(0,0,1),(1,3,1),(2,2,5)]).unwrap();
    let t = t_ba(&b, &a).unwrap();
    println!("T = {:?}", t.iter().collect::<Vec<_>>());
    let m = m_of_tridiag(&b, &a).unwrap();
    println!("M = {}", m);
    let p = mult_tridiag(&b, &a).unwrap();
    for (k, c) in p.iter() {
        println!("key {}   coeff {}   leq_alg_M {}  M_leq {}", k, c, k.leq_alg(&m), m.leq_alg(k));
    }
}
