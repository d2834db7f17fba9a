fn main() {
    // The oracle's Hermitian eigensolver binds LAPACK's zheev directly; the
    // system OpenBLAS carries the full LAPACK symbol set.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
