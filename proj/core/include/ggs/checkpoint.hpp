#ifndef GGS_CHECKPOINT_HPP
#define GGS_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "ggs/config.hpp"
#include "ggs/nn.hpp"

namespace ggs {

/// Self-contained training snapshot: the full resolved config (which fixes
/// the model architecture and the seed), completed epoch count, raw weight
/// buffers and optimizer velocity. The byte format is versioned and ends
/// with a content hash so truncation or corruption is detected on load.
struct Checkpoint {
    TrainConfig config;
    int epoch = 0; // completed epochs
    std::vector<std::vector<double>> params;
    std::vector<std::vector<double>> velocity;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::vector<std::vector<double>> snapshot_params(const std::vector<Param*>& params);
void restore_params(const std::vector<Param*>& params,
                    const std::vector<std::vector<double>>& values);

} // namespace ggs

#endif
