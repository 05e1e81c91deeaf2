#pragma once

#include <cstdint>
#include <vector>

#include "fedavo/dataset.hpp"

namespace fedavo {

/// One client's local data slice, with a held-out validation tail
/// (ceil(20%) of the shard) used as the tuning objective.
struct ClientShard {
    std::int32_t client_id = 0;
    Matrix inputs;
    std::vector<std::int32_t> labels;
    std::vector<std::size_t> train_split;  // row indices into inputs
    std::vector<std::size_t> val_split;

    std::size_t size() const { return inputs.rows; }

    /// train + val, in row order.
    std::vector<std::size_t> all_rows() const;
};

/// Seeded shuffle, then disjoint contiguous slices of shard_size per client.
std::vector<ClientShard> partition_iid(const Dataset& ds, std::size_t num_clients,
                                       std::size_t shard_size,
                                       std::uint64_t seed);

/// Label-skewed split: each client holds samples from classes_per_client
/// distinct classes (assignment balanced across classes via a seeded deal,
/// overlap between clients expected), shard filled evenly across the
/// assigned classes (+/-1).
std::vector<ClientShard> partition_noniid(const Dataset& ds,
                                          std::size_t num_clients,
                                          std::size_t classes_per_client,
                                          std::size_t shard_size,
                                          std::uint64_t seed);

} // namespace fedavo
