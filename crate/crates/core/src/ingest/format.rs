//! Binary store file.
//!
//! All integers little-endian:
//!
//! ```text
//! magic        4 bytes  "CSCT"
//! version      u16      STORE_VERSION
//! flags        u16      bit 0: friend table present
//! n_users      u64
//! n_venues     u64
//! n_reviews    u64
//! users        n_users   x (u32 byte length, UTF-8 bytes)
//! venues       n_venues  x (u32 byte length, UTF-8 bytes)
//! offsets      (n_venues + 1) x u64    venue group boundaries
//! review_user  n_reviews x u32
//! review_day   n_reviews x i32         days since 1970-01-01
//! review_stars n_reviews x u8          0 = absent
//! [flag 0] friend_offsets (n_users + 1) x u64, friend_ids x u32
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{DayNumber, Interner, ReviewStore, UserId};
use crate::{Error, Result};

pub const STORE_MAGIC: [u8; 4] = *b"CSCT";
pub const STORE_VERSION: u16 = 1;

const FLAG_FRIENDS: u16 = 1;

pub fn save_store(store: &ReviewStore, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_store(store, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_store(path: impl AsRef<Path>) -> Result<ReviewStore> {
    read_store(BufReader::new(File::open(path)?))
}

fn write_names<W: Write>(w: &mut W, names: &[String]) -> io::Result<()> {
    for name in names {
        w.write_u32::<LE>(name.len() as u32)?;
        w.write_all(name.as_bytes())?;
    }
    Ok(())
}

pub fn write_store<W: Write>(store: &ReviewStore, w: &mut W) -> Result<()> {
    w.write_all(&STORE_MAGIC)?;
    w.write_u16::<LE>(STORE_VERSION)?;
    let flags = if store.friends.is_some() { FLAG_FRIENDS } else { 0 };
    w.write_u16::<LE>(flags)?;
    w.write_u64::<LE>(store.n_users() as u64)?;
    w.write_u64::<LE>(store.n_venues() as u64)?;
    w.write_u64::<LE>(store.n_reviews() as u64)?;
    write_names(w, store.users.names())?;
    write_names(w, store.venues.names())?;
    for &off in &store.venue_offsets {
        w.write_u64::<LE>(off as u64)?;
    }
    for u in &store.review_user {
        w.write_u32::<LE>(u.0)?;
    }
    for d in &store.review_day {
        w.write_i32::<LE>(d.0)?;
    }
    w.write_all(&store.review_stars)?;
    if let Some(friends) = &store.friends {
        let mut off = 0u64;
        w.write_u64::<LE>(0)?;
        for list in friends {
            off += list.len() as u64;
            w.write_u64::<LE>(off)?;
        }
        for list in friends {
            for f in list {
                w.write_u32::<LE>(f.0)?;
            }
        }
    }
    Ok(())
}

fn truncated(what: &str) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::StoreTruncated(format!("ended inside {what}"))
        } else {
            Error::Io(e)
        }
    }
}

fn read_count<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let n = r.read_u64::<LE>().map_err(truncated(what))?;
    usize::try_from(n).map_err(|_| Error::StoreCorrupt(format!("{what} count {n} too large")))
}

fn read_names<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<String>> {
    let mut names = Vec::with_capacity(n.min(1 << 20));
    let mut buf = Vec::new();
    for _ in 0..n {
        let len = r.read_u32::<LE>().map_err(truncated(what))? as usize;
        buf.resize(len, 0);
        r.read_exact(&mut buf).map_err(truncated(what))?;
        let name = String::from_utf8(buf.clone())
            .map_err(|_| Error::StoreCorrupt(format!("{what} contains invalid UTF-8")))?;
        names.push(name);
    }
    Ok(names)
}

fn read_u32s<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        out.push(r.read_u32::<LE>().map_err(truncated(what))?);
    }
    Ok(out)
}

fn read_offsets<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<usize>> {
    (0..n)
        .map(|_| {
            let off = r.read_u64::<LE>().map_err(truncated(what))?;
            usize::try_from(off).map_err(|_| Error::StoreCorrupt(format!("{what} offset too large")))
        })
        .collect()
}

pub fn read_store<R: Read>(mut r: R) -> Result<ReviewStore> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated("header"))?;
    if magic != STORE_MAGIC {
        return Err(Error::StoreCorrupt(format!("bad magic bytes {magic:?}")));
    }
    let version = r.read_u16::<LE>().map_err(truncated("header"))?;
    if version != STORE_VERSION {
        return Err(Error::StoreVersion {
            found: version,
            expected: STORE_VERSION,
        });
    }
    let flags = r.read_u16::<LE>().map_err(truncated("header"))?;
    let n_users = read_count(&mut r, "header")?;
    let n_venues = read_count(&mut r, "header")?;
    let n_reviews = read_count(&mut r, "header")?;

    let users = Interner::from_names(read_names(&mut r, n_users, "user table")?)
        .map_err(|e| Error::StoreCorrupt(format!("user table: {e}")))?;
    let venues = Interner::from_names(read_names(&mut r, n_venues, "venue table")?)
        .map_err(|e| Error::StoreCorrupt(format!("venue table: {e}")))?;
    let venue_offsets = read_offsets(&mut r, n_venues + 1, "venue offsets")?;
    let review_user = read_u32s(&mut r, n_reviews, "review users")?
        .into_iter()
        .map(UserId)
        .collect();
    let review_day = read_u32s(&mut r, n_reviews, "review days")?
        .into_iter()
        .map(|d| DayNumber(d as i32))
        .collect();
    let mut review_stars = vec![0u8; n_reviews];
    r.read_exact(&mut review_stars).map_err(truncated("review stars"))?;

    let friends = if flags & FLAG_FRIENDS != 0 {
        let offsets = read_offsets(&mut r, n_users + 1, "friend offsets")?;
        if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::StoreCorrupt("friend offsets are not monotone".into()));
        }
        let ids = read_u32s(&mut r, *offsets.last().unwrap_or(&0), "friend ids")?;
        Some(
            offsets
                .windows(2)
                .map(|w| ids[w[0]..w[1]].iter().copied().map(UserId).collect())
                .collect(),
        )
    } else {
        None
    };

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::StoreCorrupt("trailing bytes after the last section".into()));
    }

    let store = ReviewStore {
        users,
        venues,
        friends,
        venue_offsets,
        review_user,
        review_day,
        review_stars,
        user_index: OnceLock::new(),
    };
    store.validate().map_err(Error::StoreCorrupt)?;
    Ok(store)
}
