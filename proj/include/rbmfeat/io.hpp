#pragma once

#include <string>

#include <json.hpp>

#include "rbmfeat/features.hpp"
#include "rbmfeat/models.hpp"

namespace rbmf {
namespace io {

// Binary frame container: magic "FMAT", u32 version=1, u32 T, u32 D, then
// T*D little-endian float32, row-major. Paths ending in .csv are parsed as
// one frame per line instead.
FrameMatrix read_frames(const std::string& path);
void write_frames(const std::string& path, const Mat& data);

// Model container: JSON metadata with base64-embedded little-endian double
// blocks for the parameters, plus a CRC32 content checksum. The stacking
// spec and normalization stats travel with the model so extraction cannot
// silently mismatch the training-time input pipeline.
struct ModelFile {
    int schema_version = 1;
    ModelParams params;
    StackSpec stack;
    NormStats norm;
    nlohmann::json provenance;  // config, seed, epochs completed
};

void save_model(const std::string& path, const ModelFile& mf);
ModelFile load_model(const std::string& path);

void save_pca(const std::string& path, const PcaModel& pca);
PcaModel load_pca(const std::string& path);

std::string layout_name(Layout l);
Layout parse_layout(const std::string& s);
std::string edge_policy_name(EdgePolicy e);
EdgePolicy parse_edge_policy(const std::string& s);

}  // namespace io
}  // namespace rbmf
