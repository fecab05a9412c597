use std::ptr;
use urk::protocol::{ProtocolParams, UrProtocol};
use urk_ffi::*;

fn last_error() -> String {
    let mut buf = [0u8; 256];
    let n = unsafe { urk_last_error(buf.as_mut_ptr(), buf.len()) };
    String::from_utf8_lossy(&buf[..n.min(255)]).into_owned()
}

fn protocol(n: usize, k: usize, seed: u64) -> *mut UrkProtocol {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { urk_protocol_new(n, k, 3, 4, 10, seed, &mut p) }, UrkStatus::Ok);
    p
}

#[test]
fn alice_bob_through_the_abi_matches_rust() {
    let p = protocol(64, 1, 9);
    let mut x = [0u8; 64];
    let mut y = [0u8; 64];
    for i in [3, 17, 40] {
        x[i] = 1;
    }
    y[3] = 1;
    y[40] = 1;
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { urk_alice(p, x.as_ptr(), 64, &mut m) }, UrkStatus::Ok);

    let mut len = 0;
    assert_eq!(unsafe { urk_message_serialize(m, ptr::null_mut(), 0, &mut len) }, UrkStatus::Buffer);
    let mut bytes = vec![0u8; len];
    assert_eq!(unsafe { urk_message_serialize(m, bytes.as_mut_ptr(), len, &mut len) }, UrkStatus::Ok);
    let direct = UrProtocol::new(ProtocolParams::new(64, 1).with_oversample(4).with_seed(9)).unwrap();
    let xb: Vec<bool> = x.iter().map(|&b| b == 1).collect();
    assert_eq!(bytes, direct.alice(&xb).unwrap().serialize());

    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { urk_message_deserialize(bytes.as_ptr(), len, &mut m2) }, UrkStatus::Ok);
    let mut bits = 0;
    assert_eq!(unsafe { urk_message_payload_bits(m2, &mut bits) }, UrkStatus::Ok);
    assert_eq!(bits as usize, (len - 52) * 8 - (8 - bits as usize % 8) % 8);

    let (mut out, mut count, mut failed) = ([0usize; 4], 0, true);
    let st = unsafe { urk_bob(p, m2, y.as_ptr(), 64, out.as_mut_ptr(), 4, &mut count, &mut failed) };
    assert_eq!(st, UrkStatus::Ok);
    assert!(!failed);
    assert_eq!(&out[..count], &[17]);
    unsafe {
        urk_message_free(m);
        urk_message_free(m2);
        urk_protocol_free(p);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { urk_protocol_new(8, 5, 3, 4, 10, 0, &mut p) }, UrkStatus::Param);
    assert!(p.is_null());
    assert!(last_error().contains("k ≤ n/2"), "{}", last_error());
    assert_eq!(unsafe { urk_protocol_new(64, 1, 4, 4, 10, 0, &mut p) }, UrkStatus::Param);
    assert_eq!(unsafe { urk_protocol_new(64, 1, 3, 4, 10, 0, ptr::null_mut()) }, UrkStatus::Null);

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { urk_message_deserialize(b"URK0".as_ptr(), 4, &mut m) }, UrkStatus::Format);
    assert_eq!(unsafe { urk_alice(ptr::null(), ptr::null(), 0, &mut m) }, UrkStatus::Null);

    let p = protocol(16, 1, 0);
    let bad = [2u8; 16];
    assert_eq!(unsafe { urk_alice(p, bad.as_ptr(), 16, &mut m) }, UrkStatus::Param);
    assert_eq!(unsafe { urk_alice(p, bad.as_ptr(), 15, &mut m) }, UrkStatus::Param);
    unsafe {
        urk_protocol_free(p);
        urk_protocol_free(ptr::null_mut());
        urk_message_free(ptr::null_mut());
        urk_sketch_free(ptr::null_mut());
    }
}

#[test]
fn sketch_lifecycle() {
    let p = protocol(64, 2, 5);
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(urk_sketch_new(p, &mut a), UrkStatus::Ok);
        assert_eq!(urk_sketch_new(p, &mut b), UrkStatus::Ok);
        assert_eq!(urk_sketch_update(a, 7, 1), UrkStatus::Ok);
        assert_eq!(urk_sketch_update(b, 30, 1), UrkStatus::Ok);
        assert_eq!(urk_sketch_update(b, 64, 1), UrkStatus::Param);
        let mut ab = ptr::null_mut();
        assert_eq!(urk_sketch_merge(a, b, &mut ab), UrkStatus::Ok);

        let (mut out, mut count, mut failed) = ([0usize; 2], 0, true);
        assert_eq!(urk_sketch_support_find(ab, out.as_mut_ptr(), 2, &mut count, &mut failed), UrkStatus::Ok);
        assert!(!failed);
        assert_eq!(&out[..count], &[7, 30]);
        assert_eq!(urk_sketch_support_find(ab, out.as_mut_ptr(), 1, &mut count, &mut failed), UrkStatus::Buffer);
        assert_eq!(count, 2);
        assert_eq!(urk_sketch_sample(ab, 1, out.as_mut_ptr(), 2, &mut count, &mut failed), UrkStatus::Ok);
        assert_eq!(&out[..count], &[7, 30]);

        let mut len = 0;
        assert_eq!(urk_sketch_serialize(ab, ptr::null_mut(), 0, &mut len), UrkStatus::Buffer);
        assert!(len > 52);
        urk_sketch_free(a);
        urk_sketch_free(b);
        urk_sketch_free(ab);
        urk_protocol_free(p);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/urk.h")).unwrap();
    for name in [
        "urk_last_error", "urk_protocol_new", "urk_protocol_free", "urk_alice", "urk_bob",
        "urk_message_serialize", "urk_message_deserialize", "urk_message_payload_bits", "urk_message_free",
        "urk_sketch_new", "urk_sketch_update", "urk_sketch_merge", "urk_sketch_support_find",
        "urk_sketch_sample", "urk_sketch_serialize", "urk_sketch_free", "URK_STATUS_BUFFER",
        "typedef struct UrkProtocol UrkProtocol",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("urk-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        r#"#include "urk.h"
int run(void) {
    UrkProtocol *p = NULL;
    if (urk_protocol_new(64, 1, 3, 4, 10, 7, &p) != URK_STATUS_OK) return 1;
    UrkSketch *s = NULL;
    urk_sketch_new(p, &s);
    urk_sketch_update(s, 5, 1);
    size_t out[1]; size_t count = 0; bool failed = false;
    urk_sketch_support_find(s, out, 1, &count, &failed);
    urk_sketch_free(s);
    urk_protocol_free(p);
    return failed ? 2 : (int)out[0];
}
"#,
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-c", "-o"])
        .arg(dir.join("use.o"))
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
