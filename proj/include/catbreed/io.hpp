#pragma once

#include <map>
#include <string>

#include "catbreed/fock.hpp"
#include "catbreed/sampler.hpp"
#include "catbreed/tomography.hpp"
#include "catbreed/wigner_grid.hpp"

namespace catbreed {

// All files are plain text with a key=value metadata header; '#' lines are
// comments. Doubles are printed with %.17g so round trips are bit exact.
using Metadata = std::map<std::string, std::string>;

void write_state(const std::string& path, const DensityMatrix& rho,
                 const Metadata& extra = {});
DensityMatrix read_state(const std::string& path, Metadata* meta = nullptr);

void write_wigner_grid(const std::string& path, const WignerGrid& grid,
                       const Metadata& extra = {});
WignerGrid read_wigner_grid(const std::string& path, Metadata* meta = nullptr);

// 8-bit grayscale preview, white = max, black = min.
void write_wigner_pgm(const std::string& path, const WignerGrid& grid);

void write_samples(const std::string& path, const SampleSet& s,
                   const Metadata& extra = {});
SampleSet read_samples(const std::string& path, Metadata* meta = nullptr);

void write_histogram(const std::string& path, const Histogram2D& h,
                     const Metadata& extra = {});

void write_tomography_result(const std::string& path,
                             const TomographyResult& res,
                             const TomographyConfig& cfg,
                             const ReplicaStats* stats = nullptr,
                             const Metadata& extra = {});

// Flat key=value configuration files (also the CLI config format).
Metadata read_key_value(const std::string& path);
void write_key_value(const std::string& path, const Metadata& m);

// %.17g formatting used across all writers.
std::string format_double(double v);

}  // namespace catbreed
