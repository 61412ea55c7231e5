//! Write a network to the text formats, read it back and summarize it.

use sgpursuit::io::{load_network, network_summary, save_network};
use sgpursuit::synth::{generate_coherent, CoherentSynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, _) = generate_coherent(&CoherentSynthConfig::default())?;
    let dir = std::env::temp_dir().join("sgp-network-files");
    std::fs::create_dir_all(&dir)?;
    let (edges, attrs) = (dir.join("edges.txt"), dir.join("attributes.txt"));
    save_network(&net, &edges, &attrs)?;
    let back = load_network(&edges, &attrs)?;
    assert_eq!(back, net);
    print!("{}", network_summary(&back).render());
    println!("files in {}", dir.display());
    Ok(())
}
