//! Sequential versus data-parallel execution of the two hot paths: global
//! finite-element assembly and the full set of cell solves.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poroplate::cell::solve_cells;
use poroplate::fem::{assemble_bilinear, Element, FeMesh, Form, FunctionSpace};
use poroplate::geometry::{CellGeometry, Phase};
use poroplate::{ElasticityTensor, Exec};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn assembly(c: &mut Criterion) {
    let a = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let pm = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap().mesh(0.03).unwrap();
    let fe = FeMesh::periodic(&pm);
    let space = FunctionSpace::new(&fe, Element::P2Vec, Some(Phase::Solid), &[]);
    let mut group = c.benchmark_group("elastic_assembly");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| assemble_bilinear(&fe, Form::Elastic(&a), Some(Phase::Solid), &space, &space, exec).unwrap())
        });
    }
    group.finish();
}

fn cell_solves(c: &mut Criterion) {
    let a = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let pm = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap().mesh(0.08).unwrap();
    let mut group = c.benchmark_group("cell_solves");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solve_cells(&pm, &a, exec, 1e-10).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, assembly, cell_solves);
criterion_main!(benches);
