use rayon::prelude::*;
use serde::Serialize;

use lieb_towers::io::report_json;
use lieb_towers::pph::{
    build_pph, verify_label_swap, verify_spectral_correspondence, CorrespondenceReport,
    LabelSwapReport,
};
use lieb_towers::spectra::analyze_sector;

use super::{analysis_options, load_model, require_complete, selected_sectors};
use crate::args::RunConfig;
use crate::failure::Failure;
use crate::Output;

#[derive(Serialize)]
struct SectorMap {
    source_sector: [usize; 2],
    target_sector: [usize; 2],
    target_interactions: Vec<f64>,
    correspondence: CorrespondenceReport,
    label_swap: LabelSwapReport,
}

#[derive(Serialize)]
struct PphBody {
    n_sites: usize,
    pass: bool,
    sectors: Vec<SectorMap>,
}

pub fn run(cfg: &RunConfig) -> Result<Output, Failure> {
    let model = load_model(cfg)?;
    let lat = &model.lattice;
    let sectors = selected_sectors(cfg.selector, lat.n_sites())?;
    let opts = analysis_options(cfg);
    let maps = sectors
        .par_iter()
        .map(|&sector| {
            let map = build_pph(lat, sector)?;
            let src = analyze_sector(&map.source_spec, sector, &opts)?;
            let tgt = analyze_sector(&map.target_spec, map.target_sector, &opts)?;
            require_complete(std::slice::from_ref(&src), cfg.dense_cap)?;
            require_complete(std::slice::from_ref(&tgt), cfg.dense_cap)?;
            Ok(SectorMap {
                source_sector: [sector.n_up, sector.n_down],
                target_sector: [map.target_sector.n_up, map.target_sector.n_down],
                target_interactions: map.target_spec.interactions().to_vec(),
                correspondence: verify_spectral_correspondence(&map, &src, &tgt)?,
                label_swap: verify_label_swap(&map, &src, &tgt)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut table = String::new();
    for m in &maps {
        let pass = m.correspondence.pass && m.label_swap.pass;
        table.push_str(&format!(
            "{} ({}, {}) -> ({}, {}) shift {} deviation {:.2e} min overlap {:.12}\n",
            if pass { "PASS" } else { "FAIL" },
            m.source_sector[0],
            m.source_sector[1],
            m.target_sector[0],
            m.target_sector[1],
            m.correspondence.energy_shift,
            m.correspondence.spectral_deviation,
            m.label_swap.min_weight
        ));
    }
    let pass = maps
        .iter()
        .all(|m| m.correspondence.pass && m.label_swap.pass);
    let body = PphBody {
        n_sites: lat.n_sites(),
        pass,
        sectors: maps,
    };
    Ok(Output {
        json: report_json("pph", &body),
        table,
        pass,
    })
}
