#include "fedavo/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedavo/rng.hpp"

namespace fedavo {

namespace {

ClientShard make_shard(const Dataset& ds, std::int32_t client_id,
                       const std::vector<std::size_t>& sample_indices) {
    ClientShard shard;
    shard.client_id = client_id;
    shard.inputs = Matrix(sample_indices.size(), ds.inputs.cols);
    shard.labels.resize(sample_indices.size());
    for (std::size_t i = 0; i < sample_indices.size(); ++i) {
        std::copy_n(ds.inputs.row(sample_indices[i]), ds.inputs.cols,
                    shard.inputs.row(i));
        shard.labels[i] = ds.labels[sample_indices[i]];
    }
    const std::size_t n = sample_indices.size();
    const std::size_t val = (n + 4) / 5;  // ceil(20%)
    shard.train_split.resize(n - val);
    shard.val_split.resize(val);
    std::iota(shard.train_split.begin(), shard.train_split.end(),
              std::size_t{0});
    std::iota(shard.val_split.begin(), shard.val_split.end(), n - val);
    return shard;
}

} // namespace

std::vector<std::size_t> ClientShard::all_rows() const {
    std::vector<std::size_t> rows(size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

std::vector<ClientShard> partition_iid(const Dataset& ds,
                                       std::size_t num_clients,
                                       std::size_t shard_size,
                                       std::uint64_t seed) {
    if (num_clients < 1) throw std::invalid_argument("partition: need clients");
    if (shard_size < 1) throw std::invalid_argument("partition: empty shards");
    if (num_clients * shard_size > ds.size())
        throw std::invalid_argument("partition: insufficient data");

    std::vector<std::size_t> indices(ds.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(indices);

    std::vector<ClientShard> shards;
    shards.reserve(num_clients);
    std::vector<std::size_t> slice(shard_size);
    for (std::size_t k = 0; k < num_clients; ++k) {
        std::copy_n(indices.begin() + k * shard_size, shard_size,
                    slice.begin());
        shards.push_back(make_shard(ds, static_cast<std::int32_t>(k), slice));
    }
    return shards;
}

std::vector<ClientShard> partition_noniid(const Dataset& ds,
                                          std::size_t num_clients,
                                          std::size_t classes_per_client,
                                          std::size_t shard_size,
                                          std::uint64_t seed) {
    const std::size_t m = static_cast<std::size_t>(ds.num_classes);
    if (classes_per_client < 1 || classes_per_client > m)
        throw std::invalid_argument(
            "partition: classes_per_client out of range");
    if (num_clients < 1) throw std::invalid_argument("partition: need clients");

    Rng rng(seed);

    // Class slots dealt from a balanced deck so no class is oversubscribed:
    // each class appears ceil/floor(K*c/M) times overall.
    const std::size_t slots = num_clients * classes_per_client;
    std::vector<std::size_t> deck;
    deck.reserve(slots);
    {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        const std::size_t base = slots / m;
        const std::size_t extra = slots % m;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t copies = base + (i < extra ? 1 : 0);
            for (std::size_t r = 0; r < copies; ++r) deck.push_back(order[i]);
        }
        rng.shuffle(deck);
    }

    // Deal classes_per_client distinct classes per client, swapping a
    // conflicting card with the first compatible one later in the deck.
    std::vector<std::vector<std::size_t>> assigned(num_clients);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < num_clients; ++k) {
        auto& hand = assigned[k];
        for (std::size_t j = 0; j < classes_per_client; ++j, ++cursor) {
            if (std::find(hand.begin(), hand.end(), deck[cursor]) !=
                hand.end()) {
                std::size_t swap_at = cursor + 1;
                while (swap_at < deck.size() &&
                       std::find(hand.begin(), hand.end(), deck[swap_at]) !=
                           hand.end())
                    ++swap_at;
                if (swap_at == deck.size())
                    throw std::invalid_argument(
                        "partition: cannot assign distinct classes");
                std::swap(deck[cursor], deck[swap_at]);
            }
            hand.push_back(deck[cursor]);
        }
    }

    // Per-class sample pools, consumed across clients.
    std::vector<std::vector<std::size_t>> pools(m);
    for (std::size_t i = 0; i < ds.size(); ++i)
        pools[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    for (auto& pool : pools) rng.shuffle(pool);
    std::vector<std::size_t> consumed(m, 0);

    std::vector<ClientShard> shards;
    shards.reserve(num_clients);
    for (std::size_t k = 0; k < num_clients; ++k) {
        const auto& hand = assigned[k];
        const std::size_t base = shard_size / classes_per_client;
        const std::size_t extra = shard_size % classes_per_client;
        std::vector<std::size_t> samples;
        samples.reserve(shard_size);
        for (std::size_t j = 0; j < classes_per_client; ++j) {
            const std::size_t c = hand[j];
            const std::size_t want = base + (j < extra ? 1 : 0);
            if (consumed[c] + want > pools[c].size())
                throw std::invalid_argument("partition: class " +
                                            std::to_string(c) + " exhausted");
            samples.insert(samples.end(), pools[c].begin() + consumed[c],
                           pools[c].begin() + consumed[c] + want);
            consumed[c] += want;
        }
        rng.shuffle(samples);
        shards.push_back(make_shard(ds, static_cast<std::int32_t>(k), samples));
    }
    return shards;
}

} // namespace fedavo
