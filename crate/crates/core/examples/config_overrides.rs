//! Loads a config from TOML, applies overrides and shows validation errors.

use tactile_bci::config::Config;

fn main() -> tactile_bci::Result<()> {
    let mut cfg = Config::from_toml_str("seed = 99\nerp_amplitude = 4.0\nrounds_online = 5\n")?;
    cfg.set("notch=[47, 53]")?;
    cfg.set("channels=[\"P3\",\"Pz\",\"P4\",\"CP1\",\"CP2\",\"CP5\",\"CP6\",\"Oz\"]")?;
    println!("{}", cfg.to_toml_string());

    for bad in ["p_remove = 0.01", "lp = 300.0", "erp_amplitud = 2.0"] {
        match Config::from_toml_str(bad) {
            Ok(_) => println!("{bad:<20} accepted"),
            Err(e) => println!("{bad:<20} {e}"),
        }
    }
    Ok(())
}
