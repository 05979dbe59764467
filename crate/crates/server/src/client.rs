use std::io;
use std::time::Duration;

use bytes::Bytes;
use futures::{SinkExt, StreamExt};
use tokio::net::{TcpStream, ToSocketAddrs};
use tokio_util::codec::{Framed, LengthDelimitedCodec};

use crate::protocol::{decode, encode, ClientMessage, ServerMessage};

/// Minimal client for the length-delimited transport.
pub struct Client {
    framed: Framed<TcpStream, LengthDelimitedCodec>,
}

impl Client {
    pub async fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr).await?;
        Ok(Client {
            framed: Framed::new(stream, LengthDelimitedCodec::new()),
        })
    }

    pub async fn send(&mut self, msg: &ClientMessage) -> io::Result<()> {
        self.framed.send(Bytes::from(encode(msg))).await
    }

    /// Sends raw text as one frame, valid or not.
    pub async fn send_raw(&mut self, text: &str) -> io::Result<()> {
        self.framed.send(Bytes::from(text.to_string())).await
    }

    /// Next message, or `None` once the server closes the connection.
    pub async fn recv(&mut self) -> io::Result<Option<ServerMessage>> {
        match self.framed.next().await {
            None => Ok(None),
            Some(frame) => {
                let frame = frame?;
                let text = std::str::from_utf8(&frame).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                decode(text)
                    .map(Some)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
            }
        }
    }

    pub async fn recv_timeout(&mut self, limit: Duration) -> io::Result<Option<ServerMessage>> {
        tokio::time::timeout(limit, self.recv())
            .await
            .map_err(|_| io::Error::new(io::ErrorKind::TimedOut, "no message from server"))?
    }
}
