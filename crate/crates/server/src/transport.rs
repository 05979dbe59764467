use std::io;
use std::net::SocketAddr;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use bytes::Bytes;
use futures::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc::unbounded_channel;
use tokio_util::codec::{Framed, LengthDelimitedCodec};

use crate::protocol::{codes, decode, encode, ClientMessage, ServerMessage, WireError};
use crate::session::Hub;

fn decode_client(text: &str) -> Result<ClientMessage, ServerMessage> {
    decode(text).map_err(|e| WireError::new(codes::BAD_MESSAGE, e.to_string()).into())
}

/// Accepts length-delimited connections until the listener fails.
pub async fn serve_tcp(listener: TcpListener, hub: Hub) -> io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        tracing::debug!(%peer, "tcp client connected");
        tokio::spawn(tcp_connection(stream, hub.clone()));
    }
}

async fn tcp_connection(stream: TcpStream, hub: Hub) {
    let (mut sink, mut frames) = Framed::new(stream, LengthDelimitedCodec::new()).split();
    let (tx, mut rx) = unbounded_channel::<ServerMessage>();
    let conn = hub.connection(tx);
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(Bytes::from(encode(&msg))).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(frame)) = frames.next().await {
        let msg = std::str::from_utf8(&frame)
            .map_err(|e| ServerMessage::from(WireError::new(codes::BAD_MESSAGE, e.to_string())))
            .and_then(decode_client);
        match msg {
            Ok(m) => hub.handle(&conn, m),
            Err(e) => {
                let _ = conn.tx.send(e);
            }
        }
    }
    hub.disconnect(&conn);
    drop(conn);
    writer.abort();
}

/// Router exposing the protocol on `/ws`, one message per text frame.
pub fn ws_router(hub: Hub) -> Router {
    Router::new().route("/ws", get(ws_upgrade)).with_state(hub)
}

pub async fn serve_ws(listener: TcpListener, hub: Hub) -> io::Result<()> {
    axum::serve(listener, ws_router(hub)).await
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(hub): State<Hub>) -> Response {
    ws.on_upgrade(move |socket| ws_connection(socket, hub))
}

async fn ws_connection(socket: WebSocket, hub: Hub) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = unbounded_channel::<ServerMessage>();
    let conn = hub.connection(tx);
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(Message::Text(encode(&msg).into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(frame)) = stream.next().await {
        match frame {
            Message::Text(text) => match decode_client(text.as_str()) {
                Ok(m) => hub.handle(&conn, m),
                Err(e) => {
                    let _ = conn.tx.send(e);
                }
            },
            Message::Close(_) => break,
            _ => {}
        }
    }
    hub.disconnect(&conn);
    drop(conn);
    writer.abort();
}

/// Binds both transports and serves until either fails.
pub async fn serve(tcp: SocketAddr, ws: SocketAddr, hub: Hub) -> io::Result<()> {
    let tcp = TcpListener::bind(tcp).await?;
    let ws = TcpListener::bind(ws).await?;
    tracing::info!(tcp = %tcp.local_addr()?, ws = %ws.local_addr()?, "listening");
    tokio::select! {
        r = serve_tcp(tcp, hub.clone()) => r,
        r = serve_ws(ws, hub) => r,
    }
}
