#!/usr/bin/env python3
"""Regenerates the bundled reference tables under data/.

Inputs come from three pip packages:
  wordfreq      (word frequencies, CC-BY-SA 4.0 data)
  geonamescache (GeoNames cities with population >= 15000, CC-BY 4.0 data)
  zipcodes      (US zip code centroids)

The written-English profile takes the top words of wordfreq's large English
list; the spoken profile takes wordfreq's small English list, which is closer
in size to a spoken-language corpus. Both are stand-ins: drop in any
`word<TAB>count` file with the same layout.
"""
import argparse
import gzip
import json
import os
import re

WORD_RE = re.compile(r"^[a-z][a-z'-]*[a-z]$|^[a-z]$")


def load_cb_list(path):
    import msgpack

    pack = msgpack.unpackb(gzip.open(path).read(), raw=False)
    out = []
    for index, bucket in enumerate(pack[1:]):
        freq = 10 ** (-index / 100)
        for word in bucket:
            out.append((word, freq))
    return out


def write_corpus(words, scale, limit, path):
    seen = set()
    rows = []
    for word, freq in words:
        if not WORD_RE.match(word) or word in seen:
            continue
        seen.add(word)
        rows.append((word, max(1, round(freq * scale))))
        if len(rows) >= limit:
            break
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word, count in rows:
            f.write(f"{word}\t{count}\n")
    print(path, len(rows))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()

    import importlib.util

    import geonamescache
    import zipcodes

    # Only the data files are needed, not wordfreq's tokenizer dependencies.
    wf_data = os.path.join(os.path.dirname(importlib.util.find_spec("wordfreq").origin), "data")
    write_corpus(load_cb_list(os.path.join(wf_data, "large_en.msgpack.gz")), 2.0e7, 60000,
                 os.path.join(args.out, "corpus", "written.tsv"))
    write_corpus(load_cb_list(os.path.join(wf_data, "small_en.msgpack.gz")), 3.0e6, 25000,
                 os.path.join(args.out, "corpus", "spoken.tsv"))

    zips = sorted((z for z in zipcodes.list_all() if z["lat"] and z["long"]),
                  key=lambda z: z["zip_code"])
    with open(os.path.join(args.out, "geo", "zcta.csv"), "w", newline="\n") as f:
        f.write("zip,lat,lon\n")
        last = None
        for z in zips:
            if z["zip_code"] == last:
                continue
            last = z["zip_code"]
            f.write(f"{z['zip_code']},{float(z['lat']):.4f},{float(z['long']):.4f}\n")

    gc = geonamescache.GeonamesCache()
    cities = sorted(gc.get_cities().values(),
                    key=lambda c: (c["countrycode"], c["name"], -c["population"]))
    with open(os.path.join(args.out, "geo", "gazetteer.tsv"), "w", encoding="utf-8",
              newline="\n") as f:
        for c in cities:
            name = c["name"].replace("\t", " ")
            f.write(f"{name}\t{c['admin1code']}\t{c['countrycode']}\t"
                    f"{c['latitude']:.5f}\t{c['longitude']:.5f}\t{c['population']}\n")


if __name__ == "__main__":
    main()
