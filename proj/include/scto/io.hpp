#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scto/self_consistent.hpp"

namespace scto {

// 17 significant digits, enough to round-trip any double
std::string format_double(double x);

// RFC-4180: CRLF rows, mandatory header, quoting only when needed
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::vector<std::string>* header = nullptr);

void write_density_csv(const std::string& path, const GridDensity& f);
GridDensity read_density_csv(const std::string& path);

// Binary matrix snapshot: magic "SCTOMAT1", u32 n, u32 convention tag
// (1 = column-stochastic, row-major), then n*n little-endian f64.
void write_transfer_matrix(const std::string& path, const TransferMatrix& m);
TransferMatrix read_transfer_matrix(const std::string& path);

// ----------------------------------------------------------- experiment

struct MapSpec {
    std::string name;   // doubling | perturbed-doubling | tent | rotation | identity
    double param = 0;   // eps or alpha where applicable
};

struct CouplingSpec {
    std::string name;   // sine-difference | product-trig | cosy-sinx | fourier-table
    std::vector<std::vector<double>> table;  // fourier-table coefficients
};

struct NoiseSpec {
    std::string name;   // none | gaussian | raised-cosine | grid-delta
    double param = 0;   // sigma or half-width
};

struct ExperimentConfig {
    std::string command;
    // model block
    std::string system_class = "expanding";
    std::vector<MapSpec> maps;
    std::vector<CouplingSpec> couplings;
    std::vector<double> mix_weights = {1.0, 1.0};
    NoiseSpec noise;
    double delta = 0;
    std::vector<double> delta_list;
    int grid_n = 0;
    // solver block
    std::string solver = "thm";  // thm | picard
    double tol = 1e-9;
    int max_iter = 20000;
    bool damping = false;
    double alpha = 0.5;
    // output block
    std::string out_dir = "out";
    bool svg = false;
    std::uint64_t seed = 0;
    int threads = 1;
    // command-specific knobs
    std::string observable = "cos:1";  // cos:k | sin:k
    int basis_degree = 4;
    double weight_exponent = 7;
    std::string constraint = "ball";   // ball | box | ball-box
    double radius = 1;
    double box_bound = 1;
    std::uint64_t particles = 100000;
    int burn_in = 200;
    int sample_steps = 100;
    int rate_steps = 30;
    // contraction-report block
    double K = 1, Q = 1, C = 1;
    int n1 = 10;
    double a_n1 = 0;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);  // lossless round-trip

CircleMap build_map(const MapSpec& spec);
CouplingKernel build_coupling(const CouplingSpec& spec);
std::optional<NoiseKernel> build_noise(const NoiseSpec& spec, int n);
SelfConsistentModel build_model(const ExperimentConfig& cfg);
std::vector<double> build_observable(const std::string& spec, int n);

// Minimal SVG polyline plot; CSV stays the authoritative output.
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a over bytes, used for the manifest input hash
std::uint64_t fnv1a_hash(const std::string& data);

}  // namespace scto
