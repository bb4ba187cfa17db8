fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("cargo:rerun-if-changed=proto/game.proto");
    tonic_build::configure().compile_protos(&["proto/game.proto"], &["proto"])?;
    Ok(())
}
